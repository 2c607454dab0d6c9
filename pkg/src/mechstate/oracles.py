"""Independent checks used by the test suite and the ``selfcheck`` command."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import pi

import numpy as np

from .core import DEFAULT_GRID, BasisTransform, PositionGrid, Pulse, QuantumState, build_basis_transform, state_space_grid
from .dynamics import analytic_tophat, realize_operator, tophat_pulse
from .protocol import ProtocolConfig, run_protocol
from .states import measurement_probability, overlap_probability
from .targets import TargetSpec

__all__ = [
    "OracleReport",
    "oracle_tophat",
    "oracle_fidelity_limit",
    "oracle_povm",
    "oracle_born_rule",
    "random_pulse",
    "random_state",
    "run_all",
]


@dataclass
class OracleReport:
    name: str
    max_error: float
    tolerance: float
    passed: bool = field(init=False)
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.max_error <= self.tolerance)

    def to_dict(self) -> dict:
        return asdict(self)


def oracle_tophat(grid: PositionGrid = DEFAULT_GRID, alpha0: float = 1.0,
                  lambda0: float = 1.0, tolerance: float = 1e-10, ramp: float = 0.0,
                  n_samples: int = 64) -> OracleReport:
    """Realized operator of a (optionally ramped) top-hat vs the closed form."""
    pulse = tophat_pulse(alpha0, n_samples)
    if ramp:
        shape = 1.0 + ramp * np.linspace(0.0, 1.0, n_samples)
        pulse = Pulse(pulse.t_start, pulse.dt, pulse.samples * shape).scaled_to_area(pi / 2)
    ups = realize_operator(pulse, grid, lambda0).upsilon_e.values
    exact = analytic_tophat(grid.x, alpha0, lambda0)
    err = float(np.max(np.abs(np.abs(ups) - np.abs(exact))))
    phase_err = float(np.max(np.abs(ups - exact)))
    return OracleReport("tophat", err, tolerance,
                        details={"alpha0": alpha0, "lambda0": lambda0, "ramp": ramp,
                                 "complex_error": phase_err})


def oracle_fidelity_limit(nbar: float, target: TargetSpec, s_values,
                          tolerance: float = 0.02, n_max: int | None = None) -> OracleReport:
    """Large-squeezing limit with ideal Gaussian and target-shaped operators.

    Fidelity must not decrease with ``s`` and must end within ``tolerance``
    of the ceiling, which is 1 for an ideal shaping operator.
    """
    s_values = [float(s) for s in s_values]
    if any(b <= a for a, b in zip(s_values, s_values[1:])):
        raise ValueError("s_values must be strictly ascending")
    fids = []
    for s in s_values:
        cfg = ProtocolConfig(nbar=nbar, squeeze_s=s, target=target, ideal=True, n_max=n_max)
        fids.append(run_protocol(cfg).fidelity)
    drops = [max(0.0, a - b) for a, b in zip(fids, fids[1:])]
    ceiling = 1.0
    err = max([ceiling - fids[-1]] + drops)
    return OracleReport("fidelity_limit", float(err), tolerance,
                        details={"nbar": nbar, "target": str(target), "s": s_values,
                                 "fidelity": fids, "ceiling": ceiling})


def random_pulse(rng: np.random.Generator, x_max: float, lambda0: float = 1.0,
                 phase_step: float = 0.05) -> Pulse:
    """Sum of up to three Gaussians with random complex weights, area pi/2."""
    k = int(rng.integers(1, 4))
    centers = rng.uniform(-1.0, 1.0, k)
    widths = rng.uniform(0.2, 0.6, k)
    weights = rng.normal(size=k) + 1j * rng.normal(size=k)
    lo, hi = (centers - 4 * widths).min(), (centers + 4 * widths).max()
    # upper bound on the normalized peak, used to pick dt
    peak = (pi / 2) / (np.sqrt(2 * pi) * widths.min()) * k
    dt = phase_step / max(peak, lambda0 * x_max)
    n = int(np.ceil((hi - lo) / dt))
    t = lo + dt * (np.arange(n) + 0.5)
    shape = (weights[:, None] * np.exp(-((t[None, :] - centers[:, None]) ** 2)
                                        / (2 * widths[:, None] ** 2))).sum(axis=0)
    return Pulse(lo, dt, shape).scaled_to_area(pi / 2)


def random_state(rng: np.random.Generator, n_max: int, n_high: int = 9) -> QuantumState:
    """Mixture of up to five Fock projectors with ``n <= n_high``."""
    k = int(rng.integers(1, 6))
    ns = rng.choice(n_high + 1, size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    rho = np.zeros((n_max + 1, n_max + 1), complex)
    rho[ns, ns] = w
    return QuantumState(rho)


def _suite(n_cases, seed, basis):
    rng = np.random.default_rng(seed)
    for _ in range(n_cases):
        pulse = random_pulse(rng, basis.grid.x_max)
        state = random_state(rng, basis.n_max)
        yield pulse, state, realize_operator(pulse, basis.grid)


def _default_basis(basis):
    if basis is None:
        basis = build_basis_transform(state_space_grid(80), 80)
    return basis


def oracle_povm(n_cases: int = 100, seed: int = 0, basis: BasisTransform | None = None,
                tolerance: float = 1e-8) -> OracleReport:
    """``p(e) + p(g) = 1`` over random pulses and states."""
    basis = _default_basis(basis)
    errs, p_range = [], [1.0, 0.0]
    for pulse, state, op in _suite(n_cases, seed, basis):
        pe = measurement_probability(state, op.upsilon_e, basis)
        pg = measurement_probability(state, op.upsilon_g, basis)
        errs.append(abs(pe + pg - 1.0))
        p_range = [min(p_range[0], pe, pg), max(p_range[1], pe, pg)]
    return OracleReport("povm_completeness", float(max(errs)), tolerance, seed,
                        {"n_cases": n_cases, "probability_range": p_range})


def oracle_born_rule(n_cases: int = 100, seed: int = 0, basis: BasisTransform | None = None,
                     tolerance: float = 1e-8) -> OracleReport:
    """Trace formula vs overlap of ``|ups|^2`` with the position marginal."""
    basis = _default_basis(basis)
    errs = []
    for pulse, state, op in _suite(n_cases, seed, basis):
        for ups in (op.upsilon_e, op.upsilon_g):
            a = measurement_probability(state, ups, basis)
            b = overlap_probability(state, ups, basis)
            errs.append(abs(a - b) / max(abs(b), 1e-300))
    return OracleReport("born_rule", float(max(errs)), tolerance, seed, {"n_cases": n_cases})


def run_all(seed: int = 0, n_cases: int = 100) -> list:
    basis = _default_basis(None)
    return [
        oracle_tophat(),
        oracle_povm(n_cases, seed, basis),
        oracle_born_rule(n_cases, seed, basis),
        oracle_fidelity_limit(5.0, TargetSpec.fock(3), [2.0, 4.0, 8.0, 16.0]),
    ]
