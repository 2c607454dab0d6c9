"""Shared data model: grids, sampled functions, pulses, operators and states.

Positions are dimensionless with ``sqrt(2) X = b + b^dagger``, so the
mechanical ground state has ``<X^2> = 1/2``. Times are measured in units of
``1/lambda0`` unless stated otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

__all__ = [
    "SystemParams",
    "PositionGrid",
    "GridFunction",
    "Pulse",
    "MeasurementOperator",
    "QuantumState",
    "BasisTransform",
    "ProtocolResult",
    "GridTooSmallError",
    "build_basis_transform",
    "state_space_grid",
    "hermite_functions",
    "DEFAULT_GRID",
    "DEFAULT_N_MAX",
]

# n_max = 80 at nbar = 5 leaves a thermal tail of (5/6)**81 ~ 4e-7.
DEFAULT_N_MAX = 80


class GridTooSmallError(ValueError):
    """Raised when a position grid cannot hold the requested Fock states."""


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the qubit-resonator device (SI angular units)."""

    lambda0: float
    omega_m: float
    t2_qubit: float
    q_mech: float
    nbar: float

    def __post_init__(self):
        if not (self.lambda0 > 0 and self.omega_m > 0):
            raise ValueError("lambda0 and omega_m must be positive")
        if not (self.t2_qubit > 0 and self.q_mech > 0):
            raise ValueError("t2_qubit and q_mech must be positive")
        if not self.nbar >= 0:
            raise ValueError("nbar must be non-negative")

    @property
    def coupling_ratio(self) -> float:
        return self.lambda0 / self.omega_m

    @classmethod
    def from_lab_units(cls, lambda0_mhz=8.5, omegam_mhz=125.0, t2_us=2.0,
                       q=1e5, nbar=5.0) -> "SystemParams":
        """Build from ``f/2pi`` values in MHz and T2 in microseconds."""
        return cls(
            lambda0=2 * pi * lambda0_mhz * 1e6,
            omega_m=2 * pi * omegam_mhz * 1e6,
            t2_qubit=t2_us * 1e-6,
            q_mech=q,
            nbar=nbar,
        )


@dataclass(frozen=True)
class PositionGrid:
    """Uniform grid symmetric about the origin."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("a grid needs at least two points")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not np.isclose(self.x_min, -self.x_max, rtol=0, atol=1e-12 * abs(self.x_max)):
            raise ValueError("grid must be symmetric about 0")

    @classmethod
    def symmetric(cls, x_max: float, n_points: int) -> "PositionGrid":
        return cls(-float(x_max), float(x_max), int(n_points))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}

    @classmethod
    def from_dict(cls, d: dict) -> "PositionGrid":
        return cls(float(d["x_min"]), float(d["x_max"]), int(d["n_points"]))


DEFAULT_GRID = PositionGrid.symmetric(8.0, 1024)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function of position on a ``PositionGrid``."""

    grid: PositionGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function has non-finite entries")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: PositionGrid, fn) -> "GridFunction":
        return cls(grid, fn(grid.x))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def normalized(self) -> "GridFunction":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero function")
        return GridFunction(self.grid, self.values / n)


@dataclass(frozen=True, eq=False)
class Pulse:
    """Piecewise-constant drive: ``samples[k]`` holds on ``[t_k, t_k + dt)``.

    ``t_k = t_start + k * dt`` in units of ``1/lambda0``.
    """

    t_start: float
    dt: float
    samples: np.ndarray
    chi: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        samples = _frozen(self.samples)
        if samples.ndim != 1:
            raise ValueError("pulse samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("pulse has non-finite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.samples.size)

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt

    @property
    def area(self) -> float:
        """Unsigned area ``sum |alpha| dt``."""
        return float(np.sum(np.abs(self.samples)) * self.dt)

    def scaled_to_area(self, area: float = pi / 2) -> "Pulse":
        current = self.area
        if current == 0:
            raise ValueError("cannot rescale a zero pulse")
        return Pulse(self.t_start, self.dt, self.samples * (area / current), self.chi)


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """Position-diagonal Kraus pair for the excited and ground qubit outcomes."""

    upsilon_e: GridFunction
    upsilon_g: GridFunction

    def __post_init__(self):
        if self.upsilon_e.grid != self.upsilon_g.grid:
            raise ValueError("excited and ground channels must share a grid")
        if self.completeness_error() > 1e-9:
            raise ValueError(
                f"operator pair is not complete: error {self.completeness_error():.2e}")

    @property
    def grid(self) -> PositionGrid:
        return self.upsilon_e.grid

    def completeness_error(self) -> float:
        total = np.abs(self.upsilon_e.values) ** 2 + np.abs(self.upsilon_g.values) ** 2
        return float(np.max(np.abs(total - 1.0)))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix in the Fock basis truncated at ``n_max``."""

    rho_fock: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.rho_fock)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")
        object.__setattr__(self, "rho_fock", rho)

    @property
    def n_max(self) -> int:
        return self.rho_fock.shape[0] - 1

    @classmethod
    def fock(cls, n: int, n_max: int = DEFAULT_N_MAX) -> "QuantumState":
        if not 0 <= n <= n_max:
            raise ValueError(f"Fock index {n} outside 0..{n_max}")
        rho = np.zeros((n_max + 1, n_max + 1), complex)
        rho[n, n] = 1.0
        return cls(rho)

    @classmethod
    def pure(cls, coeffs) -> "QuantumState":
        c = np.asarray(coeffs, complex)
        c = c / np.linalg.norm(c)
        return cls(np.outer(c, c.conj()))


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalized oscillator eigenfunctions ``u[n, j] = psi_n(x_j)``.

    Uses the three-term recurrence on normalized functions. A per-point
    exponent is carried separately so that the Gaussian factor cannot
    underflow before the polynomial part has grown.
    """
    x = np.asarray(x, dtype=float)
    u = np.empty((n_max + 1, x.size))
    # h_n = psi_n * exp(-log_scale); rescaled whenever |h| gets large
    log_scale = -0.5 * x**2 - 0.25 * np.log(pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    u[0] = np.exp(log_scale)
    for n in range(1, n_max + 1):
        nxt = np.sqrt(2.0 / n) * x * cur - np.sqrt((n - 1) / n) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            cur[big] *= 1e-100
            prev[big] *= 1e-100
            log_scale[big] += 100 * np.log(10.0)
        u[n] = cur * np.exp(log_scale)
    return u


@dataclass(frozen=True, eq=False)
class BasisTransform:
    """Fock-to-position map ``u[n, j] = psi_n(x_j)``."""

    grid: PositionGrid
    n_max: int
    u: np.ndarray

    def to_position(self, coeffs) -> np.ndarray:
        """Wavefunction samples of a Fock-coefficient vector."""
        return np.asarray(coeffs) @ self.u

    def to_fock(self, values) -> np.ndarray:
        """Fock coefficients of sampled wavefunction values (quadrature)."""
        return self.u @ np.asarray(values) * self.grid.dx

    def position_kernel(self, state: QuantumState) -> np.ndarray:
        """``rho(x_i, x_j)`` on the grid."""
        self._check(state)
        return self.u.T @ state.rho_fock @ self.u

    def _check(self, state: QuantumState):
        if state.n_max != self.n_max:
            raise ValueError(
                f"state truncation {state.n_max} does not match basis {self.n_max}")


def build_basis_transform(grid: PositionGrid, n_max: int = DEFAULT_N_MAX,
                          decay_tol: float = 1e-8) -> BasisTransform:
    """Tabulate Hermite functions on ``grid`` up to ``n_max``.

    Raises GridTooSmallError if any function up to ``n_max`` is still larger
    than ``decay_tol`` at the grid boundary.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    u = hermite_functions(n_max, grid.x)
    edge = np.maximum(np.abs(u[:, 0]), np.abs(u[:, -1]))
    bad = np.nonzero(edge > decay_tol)[0]
    if bad.size:
        raise GridTooSmallError(
            f"grid too small for n_max: psi_{bad[0]} is {edge[bad[0]]:.1e} at "
            f"x = {grid.x_max:g}")
    u.setflags(write=False)
    return BasisTransform(grid, n_max, u)


def state_space_grid(n_max: int, margin: float = 8.0) -> PositionGrid:
    """Smallest convenient grid that holds Fock states up to ``n_max``.

    The outermost classical turning point is ``sqrt(2 n_max + 1)``; the grid
    extends ``margin`` beyond it and resolves momenta up to the same value.
    """
    turning = np.sqrt(2 * n_max + 1)
    x_max = float(np.ceil(turning + margin))
    dx = pi / (turning + 2 * margin) / 2
    n_points = int(2 ** np.ceil(np.log2(2 * x_max / dx + 1)))
    return PositionGrid.symmetric(x_max, n_points)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    """Outcome of a conditional state-preparation run."""

    final_state: QuantumState
    step_probabilities: list
    fidelity: float
    realized_operators: list = field(default_factory=list)
    stage_summaries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    pulses: list = field(default_factory=list)

    def __post_init__(self):
        probs = [float(p) for p in self.step_probabilities]
        if any(not 0.0 <= p <= 1.0 + 1e-12 for p in probs):
            raise ValueError(f"step probabilities out of range: {probs}")
        if not -1e-12 <= self.fidelity <= 1.0 + 1e-12:
            raise ValueError(f"fidelity out of range: {self.fidelity}")
        object.__setattr__(self, "step_probabilities", probs)

    @property
    def joint_probability(self) -> float:
        return float(np.prod(self.step_probabilities))
