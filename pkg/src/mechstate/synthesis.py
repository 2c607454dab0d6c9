"""Pulse synthesis from a target position-space measurement operator.

The drive is the Fourier transform of the target,

    alpha(t) ~ integral dx exp(-i chi lambda0 t x) target(x),

sampled on a time window symmetric about ``t = 0``, trimmed where the
amplitude is negligible and scaled to unsigned area pi/2. The bandwidth
factor ``chi`` is then tuned so the realized operator best matches the
target.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.signal import czt
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import GridFunction, MeasurementOperator, PositionGrid, Pulse
from .dynamics import _run, realize_operator
from .validation import check_grid_function, check_nonzero, check_scalar

__all__ = [
    "SynthesisConfig",
    "SynthesisError",
    "SynthesisWarning",
    "ChiOptimum",
    "synthesize_pulse",
    "operator_fidelity",
    "optimize_chi",
    "golden_section_max",
    "PulseSynthesizer",
]

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class SynthesisError(ValueError):
    """The target cannot be turned into a representable pulse."""


class SynthesisWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SynthesisConfig:
    chi_min: float = 0.2
    chi_max: float = 5.0
    n_scan: int = 50
    refine_tol: float = 1e-3
    truncation_eps: float = 1e-4
    # longest pulse kept, in units of 1/lambda0
    max_duration: float = 40.0
    # bound on max(|alpha|, lambda0 x_max) * dt
    phase_step: float = 0.05

    def __post_init__(self):
        if not 0 < self.chi_min < self.chi_max:
            raise ValueError("need 0 < chi_min < chi_max")
        if self.n_scan < 8:
            raise ValueError("n_scan must be at least 8")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")
        if not 0 < self.truncation_eps < 1:
            raise ValueError("truncation_eps must lie in (0, 1)")
        if not (self.max_duration > 0 and self.phase_step > 0):
            raise ValueError("max_duration and phase_step must be positive")


def _fourier(values, x0, dx, t, k):
    """``sum_j values_j exp(-i k x_j t_m) dx`` on a uniform ``t`` grid."""
    m = t.size
    if m == 1:
        return np.array([np.sum(values * np.exp(-1j * k * (x0 + dx * np.arange(values.size)) * t[0])) * dx])
    dt = t[1] - t[0]
    w = np.exp(-1j * k * dx * dt)
    a = np.exp(1j * k * dx * t[0])
    return czt(values, m, w, a) * np.exp(-1j * k * x0 * t) * dx


def _synthesize(target: GridFunction, chi: float, lambda0_scaled: float,
                cfg: SynthesisConfig):
    grid = target.grid
    values = target.values
    if not np.any(values):
        raise SynthesisError("target is identically zero")
    k = chi * lambda0_scaled
    x0, dx = grid.x_min, grid.dx
    # transform of a sampled function is periodic in t with period 2 pi / (k dx)
    alias_half = pi / (k * dx)
    length = grid.x_max - grid.x_min
    n_coarse = 8 * grid.n_points + 1
    t_c = np.linspace(-alias_half, alias_half, n_coarse)
    mag = np.abs(_fourier(values, x0, dx, t_c, k))
    peak = mag.max()
    inside = np.nonzero(mag >= cfg.truncation_eps * peak)[0]
    dt_c = t_c[1] - t_c[0]
    support = max(abs(t_c[inside[0]]), abs(t_c[inside[-1]])) + dt_c
    half = cfg.max_duration / 2
    clipped = False
    if support >= alias_half - dt_c:
        if alias_half <= half:
            raise SynthesisError(
                f"pulse support reaches the representable window |t| <= {alias_half:.4g} "
                f"(chi={chi:.4g}); a finer position grid is required "
                f"(dx < {dx:.3g})")
        clipped = True
    elif support > half:
        clipped = True
    if clipped:
        support = half

    # resolve the normalized peak amplitude before fixing dt
    area_c = mag[np.abs(t_c) <= support].sum() * dt_c
    amp = peak * (pi / 2) / area_c if area_c > 0 else 0.0
    dt = cfg.phase_step / max(amp, lambda0_scaled * grid.x_max)
    n = max(1, int(np.ceil(2 * support / dt)))
    t_start = -0.5 * n * dt
    mid = t_start + dt * (np.arange(n) + 0.5)
    samples = _fourier(values, x0, dx, mid, k)
    pulse = Pulse(t_start, dt, samples, chi).scaled_to_area(pi / 2)
    info = {"support": float(support), "clipped": clipped,
            "representable": float(min(alias_half, half)), "resolution": float(2 * pi / (k * length))}
    return pulse, info


def synthesize_pulse(target, chi: float, lambda0_scaled: float = 1.0,
                     config: SynthesisConfig | None = None) -> Pulse:
    """Drive pulse whose realized operator approximates ``target``.

    Warns with SynthesisWarning when the transform has not decayed below
    ``truncation_eps`` within ``max_duration``; the pulse is then clipped.
    """
    target = check_grid_function(target)
    check_scalar(chi, "chi", min_val=0, include_min=False)
    check_scalar(lambda0_scaled, "lambda0_scaled", min_val=0, include_min=False)
    pulse, info = _synthesize(target, chi, lambda0_scaled, config or SynthesisConfig())
    if info["clipped"]:
        warnings.warn(
            f"pulse transform extends past the {info['representable']:.3g} window "
            f"at chi={chi:.4g}; pulse clipped", SynthesisWarning, stacklevel=2)
    return pulse


def operator_fidelity(a, b) -> float:
    """``|sum a b* dx|`` after L2-normalizing both functions."""
    a = check_grid_function(a)
    b = check_grid_function(b, a.grid)
    na, nb = a.norm(), b.norm()
    if na == 0 or nb == 0:
        raise ValueError("operator fidelity undefined for a zero function")
    overlap = np.sum(a.values * np.conj(b.values)) * a.grid.dx
    return float(abs(overlap) / (na * nb))


def golden_section_max(f, lo, hi, tol, f_cache=None):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` until the bracket is below ``tol``.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    seen = {} if f_cache is None else f_cache

    def g(x):
        if x not in seen:
            seen[x] = f(x)
        return seen[x]

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = g(x1), g(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = g(x2)
    # smallest x among equal maxima
    best = max(sorted(seen), key=lambda x: seen[x])
    return best, seen[best]


@dataclass
class ChiOptimum:
    chi: float
    fidelity: float
    pulse: Pulse
    realized: MeasurementOperator
    low_fidelity: bool = False
    clipped: bool = False
    scan: list = field(default_factory=list)


def optimize_chi(target, lambda0_scaled: float = 1.0,
                 config: SynthesisConfig | None = None,
                 realize_grid: PositionGrid | None = None) -> ChiOptimum:
    """Coarse log scan over chi, then golden-section refinement.

    Fidelity is always scored on the target's grid; ``realize_grid``, when
    given, is the grid on which the returned operator is evaluated.
    """
    cfg = config or SynthesisConfig()
    target = check_nonzero(check_grid_function(target))

    def fid(chi):
        pulse, info = _synthesize(target, chi, lambda0_scaled, cfg)
        ups = realize_operator(pulse, target.grid, lambda0_scaled).upsilon_e
        if not np.any(ups.values):
            return 0.0
        return operator_fidelity(target, ups)

    chis = np.geomspace(cfg.chi_min, cfg.chi_max, cfg.n_scan)
    scores = np.array([fid(c) for c in chis])
    i = int(np.argmax(scores))
    lo = chis[max(i - 1, 0)]
    hi = chis[min(i + 1, chis.size - 1)]
    cache = {float(c): float(s) for c, s in zip(chis, scores)}
    chi_star, f_star = golden_section_max(fid, float(lo), float(hi), cfg.refine_tol, cache)

    pulse, info = _synthesize(target, chi_star, lambda0_scaled, cfg)
    realized = realize_operator(pulse, realize_grid or target.grid, lambda0_scaled)
    if info["clipped"]:
        warnings.warn(f"optimal pulse clipped at chi={chi_star:.4g}", SynthesisWarning,
                      stacklevel=2)
    low = f_star < 0.5
    if low:
        warnings.warn(f"best operator fidelity {f_star:.3f} < 0.5", SynthesisWarning,
                      stacklevel=2)
    return ChiOptimum(chi_star, f_star, pulse, realized, low, info["clipped"],
                      list(zip(chis.tolist(), scores.tolist())))


class PulseSynthesizer(BaseEstimator):
    """Fit a drive pulse to a target measurement operator.

    Parameters
    ----------
    chi : float or "auto"
        Bandwidth scale. ``"auto"`` maximizes the operator fidelity.
    lambda0 : float
        Coupling in the pulse's inverse time units.
    chi_min, chi_max, n_scan, refine_tol, truncation_eps, max_duration
        See :class:`SynthesisConfig`.

    Attributes
    ----------
    chi_ : float
    pulse_ : Pulse
    operator_ : MeasurementOperator
        Realized operator on the target grid.
    fidelity_ : float
    """

    def __init__(self, chi="auto", lambda0=1.0, chi_min=0.2, chi_max=5.0, n_scan=50,
                 refine_tol=1e-3, truncation_eps=1e-4, max_duration=40.0):
        self.chi = chi
        self.lambda0 = lambda0
        self.chi_min = chi_min
        self.chi_max = chi_max
        self.n_scan = n_scan
        self.refine_tol = refine_tol
        self.truncation_eps = truncation_eps
        self.max_duration = max_duration

    def _config(self):
        return SynthesisConfig(self.chi_min, self.chi_max, self.n_scan, self.refine_tol,
                               self.truncation_eps, self.max_duration)

    def fit(self, target, grid: PositionGrid | None = None):
        target = check_nonzero(check_grid_function(target, grid))
        check_scalar(self.lambda0, "lambda0", min_val=0, include_min=False)
        cfg = self._config()
        if self.chi == "auto":
            opt = optimize_chi(target, self.lambda0, cfg)
            self.chi_, self.pulse_, self.operator_ = opt.chi, opt.pulse, opt.realized
            self.fidelity_ = opt.fidelity
            self.scan_ = opt.scan
        else:
            chi = check_scalar(self.chi, "chi", min_val=0, include_min=False)
            self.chi_ = float(chi)
            self.pulse_ = synthesize_pulse(target, self.chi_, self.lambda0, cfg)
            self.operator_ = realize_operator(self.pulse_, target.grid, self.lambda0)
            self.fidelity_ = operator_fidelity(target, self.operator_.upsilon_e)
            self.scan_ = [(self.chi_, self.fidelity_)]
        self.target_ = target
        return self

    def transform(self, x):
        """Realized excited-channel amplitude at positions ``x``."""
        check_is_fitted(self, "pulse_")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e, _ = _run(self.pulse_, x, self.lambda0)
        return e

    def score(self, target, grid: PositionGrid | None = None) -> float:
        check_is_fitted(self, "pulse_")
        target = check_nonzero(check_grid_function(target, grid or self.target_.grid))
        ups = realize_operator(self.pulse_, target.grid, self.lambda0).upsilon_e
        return operator_fidelity(target, ups)

