"""Target wavefunctions / measurement operators and their text specs."""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .core import GridFunction, PositionGrid, hermite_functions

__all__ = ["TargetSpec", "render_target", "parse_target", "KINDS"]

# kind -> ordered (name, default); None means required
KINDS = {
    "fock": (("n", None),),
    "gaussian": (("s", None),),
    "cat": (("d", 2.0), ("phi", pi / 2)),
    "plane": (("k", 2.0), ("lo", -3.0), ("hi", 3.0)),
    "two_lobed": (("sep", 3.0), ("width", 0.7)),
    "quadratic": (("xbar", 1.5),),
}
_ALIASES = {"truncated_plane_wave": "plane", "twolobed": "two_lobed", "gauss": "gaussian"}


@dataclass(frozen=True)
class TargetSpec:
    """A named target shape with its parameters, e.g. ``TargetSpec("fock", (("n", 3),))``."""

    kind: str
    params: tuple = ()

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unsupported target kind {self.kind!r}")
        given = dict(self.params)
        unknown = set(given) - {name for name, _ in KINDS[kind]}
        if unknown:
            raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
        full = []
        for name, default in KINDS[kind]:
            if name in given:
                value = given[name]
            elif default is None:
                raise ValueError(f"{kind} target needs parameter {name!r}")
            else:
                value = default
            if not np.isfinite(value):
                raise ValueError(f"{kind}.{name} must be finite")
            full.append((name, float(value)))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", tuple(full))
        p = dict(full)
        if kind == "fock" and (p["n"] < 0 or p["n"] != int(p["n"])):
            raise ValueError("Fock index must be a non-negative integer")
        if kind == "gaussian" and p["s"] <= 0:
            raise ValueError("gaussian s must be positive")
        if kind == "plane" and not p["hi"] > p["lo"]:
            raise ValueError("plane wave needs hi > lo")
        if kind == "two_lobed" and p["width"] <= 0:
            raise ValueError("two_lobed width must be positive")

    @classmethod
    def fock(cls, n: int) -> "TargetSpec":
        return cls("fock", (("n", n),))

    @classmethod
    def gaussian(cls, s: float) -> "TargetSpec":
        return cls("gaussian", (("s", s),))

    def __getitem__(self, name):
        return dict(self.params)[name]

    def __str__(self):
        return f"{self.kind}:" + ",".join(f"{k}={v:g}" for k, v in self.params)


def parse_target(text: str) -> TargetSpec:
    """Parse ``kind:a=1,b=2`` (or ``kind:value`` for the first parameter)."""
    kind, _, rest = text.strip().partition(":")
    kind = _ALIASES.get(kind.strip(), kind.strip())
    if kind not in KINDS:
        raise ValueError(f"unsupported target kind {kind!r}")
    params = []
    for i, item in enumerate(filter(None, (s.strip() for s in rest.split(",")))):
        if "=" in item:
            name, _, value = item.partition("=")
            name = name.strip()
        else:
            if i >= len(KINDS[kind]):
                raise ValueError(f"too many values for {kind}")
            name, value = KINDS[kind][i][0], item
        try:
            params.append((name, float(value)))
        except ValueError:
            raise ValueError(f"bad value {value!r} for {kind}.{name}") from None
    return TargetSpec(kind, tuple(params))


def render_target(spec: TargetSpec, grid: PositionGrid) -> GridFunction:
    """Sample the target on ``grid``, L2-normalized."""
    x = grid.x
    p = dict(spec.params)
    if spec.kind == "fock":
        values = hermite_functions(int(p["n"]), x)[-1]
    elif spec.kind == "gaussian":
        values = np.exp(-(x**2) * p["s"] ** 2 / 4)
    elif spec.kind == "cat":
        d, phi = p["d"], p["phi"]
        values = np.exp(-((x - d) ** 2) / 2) + np.exp(1j * phi) * np.exp(-((x + d) ** 2) / 2)
    elif spec.kind == "plane":
        inside = (x >= p["lo"]) & (x <= p["hi"])
        values = np.where(inside, np.exp(1j * p["k"] * x), 0.0)
    elif spec.kind == "two_lobed":
        h, w = p["sep"] / 2, p["width"]
        values = np.exp(-((x - h) ** 2) / (2 * w**2)) + np.exp(-((x + h) ** 2) / (2 * w**2))
    elif spec.kind == "quadratic":
        values = np.exp(-((p["xbar"] ** 2 - x**2) ** 2))
    else:  # pragma: no cover - guarded by TargetSpec
        raise ValueError(f"unsupported target kind {spec.kind!r}")
    fn = GridFunction(grid, np.asarray(values, dtype=complex))
    if fn.norm() == 0:
        raise ValueError(f"target {spec} vanishes on this grid")
    return fn.normalized()
