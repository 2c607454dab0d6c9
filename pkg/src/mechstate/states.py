"""Mechanical state algebra in the truncated Fock basis.

Position-space quantities are views through a :class:`BasisTransform`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .core import BasisTransform, GridFunction, PositionGrid, QuantumState
from .validation import check_same_grid

__all__ = [
    "WignerMap",
    "VanishingProbabilityError",
    "thermal_state",
    "apply_measurement",
    "measurement_probability",
    "overlap_probability",
    "rotate",
    "position_marginal",
    "momentum_marginal",
    "position_variance",
    "momentum_variance",
    "wigner",
    "state_fidelity",
    "purity",
]


class VanishingProbabilityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WignerMap:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # shape (len(x_axis), len(p_axis))

    @property
    def dx(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    def total(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def x_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dx

    def value_at(self, x: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.x_axis - x)))
        j = int(np.argmin(np.abs(self.p_axis - p)))
        return float(self.values[i, j])


def thermal_state(nbar: float, n_max: int) -> QuantumState:
    """Geometric populations ``nbar^n / (nbar+1)^(n+1)``, renormalized."""
    if not nbar >= 0:
        raise ValueError("nbar must be non-negative")
    n = np.arange(n_max + 1)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        ratio = nbar / (nbar + 1.0)
        tail = ratio ** (n_max + 1)
        if tail > 1e-3:
            raise ValueError(
                f"thermal tail beyond n_max={n_max} is {tail:.2e}; increase n_max")
        p = ratio**n / (nbar + 1.0)
        p = p / p.sum()
    return QuantumState(np.diag(p).astype(complex))


def _operator_matrix(ups: GridFunction, basis: BasisTransform) -> np.ndarray:
    u = basis.u
    return (u * (ups.values * basis.grid.dx)) @ u.T


def _clean(r: np.ndarray) -> np.ndarray:
    r = 0.5 * (r + r.conj().T)
    r = r / np.trace(r).real
    w, v = np.linalg.eigh(r)
    small = (w < 0) & (w >= -1e-9)
    if np.any(small):
        w = np.where(small, 0.0, w)
        r = (v * w) @ v.conj().T
        r = 0.5 * (r + r.conj().T)
        r = r / np.trace(r).real
    return r


def apply_measurement(state: QuantumState, ups: GridFunction, basis: BasisTransform):
    """Condition ``state`` on the position-diagonal operator ``ups``.

    Returns ``(post_state, probability)`` with probability ``Tr[U rho U^dagger]``.
    """
    check_same_grid(ups.grid, basis.grid, "operator and basis grids")
    basis._check(state)
    U = _operator_matrix(ups, basis)
    r = U @ state.rho_fock @ U.conj().T
    p = float(np.trace(r).real)
    if p < 1e-12:
        raise VanishingProbabilityError("measurement outcome has vanishing probability")
    return QuantumState(_clean(r / p)), p


def measurement_probability(state: QuantumState, ups: GridFunction,
                            basis: BasisTransform) -> float:
    """Born-rule probability ``Tr[U^dagger U rho]`` without conditioning."""
    check_same_grid(ups.grid, basis.grid, "operator and basis grids")
    U = _operator_matrix(ups, basis)
    return float(np.real(np.sum((U.conj().T @ U) * state.rho_fock.T)))


def overlap_probability(state: QuantumState, ups: GridFunction,
                        basis: BasisTransform) -> float:
    """``sum |ups(x)|^2 P(x) dx`` with ``P`` the position marginal."""
    P = position_marginal(state, basis).values.real
    return float(np.sum(np.abs(ups.values) ** 2 * P) * basis.grid.dx)


def rotate(state: QuantumState, theta: float) -> QuantumState:
    """Free evolution ``exp(-i theta n)``; ``theta = pi/2`` is a quarter period."""
    phase = np.exp(-1j * theta * np.arange(state.n_max + 1))
    r = phase[:, None] * state.rho_fock * phase.conj()[None, :]
    return QuantumState(0.5 * (r + r.conj().T))


def position_marginal(state: QuantumState, basis: BasisTransform) -> GridFunction:
    basis._check(state)
    u = basis.u
    P = np.real(np.sum(u * (state.rho_fock @ u), axis=0))
    return GridFunction(basis.grid, P)


def momentum_marginal(state: QuantumState, basis: BasisTransform) -> GridFunction:
    """Momentum density, sampled on the basis grid's points."""
    return position_marginal(rotate(state, pi / 2), basis)


def _variance(P: GridFunction) -> float:
    x, w = P.grid.x, P.values.real * P.grid.dx
    mean = np.sum(x * w)
    return float(np.sum((x - mean) ** 2 * w))


def position_variance(state: QuantumState, basis: BasisTransform) -> float:
    return _variance(position_marginal(state, basis))


def momentum_variance(state: QuantumState, basis: BasisTransform) -> float:
    return _variance(momentum_marginal(state, basis))


def wigner(state: QuantumState, basis: BasisTransform, p_grid: PositionGrid,
           x_max: float | None = None, n_rows: int = 201) -> WignerMap:
    """Wigner function ``(1/pi) int dy exp(-2ipy) rho(x+y, x-y)``.

    Row positions lie on the half-grid ``(x_a + x_b)/2``, so ``x = 0`` is
    always a row. Rows are spaced by a multiple of ``dx/2`` chosen to give
    about ``n_rows`` rows within ``|x| <= x_max``; the ``y`` sum runs over
    the whole basis grid.
    """
    basis._check(state)
    grid = basis.grid
    n = grid.n_points
    half = grid.dx / 2
    x_max = grid.x_max if x_max is None else x_max
    m = int(np.floor(x_max / half + 1e-9))
    stride = max(1, int(np.ceil(2 * m / max(n_rows - 1, 1))))
    offsets = np.arange(-(m // stride), m // stride + 1) * stride
    sums = (n - 1) + offsets
    sums = sums[(sums >= 0) & (sums <= 2 * (n - 1))]
    u = basis.u
    B = state.rho_fock @ u
    p = p_grid.x
    values = np.empty((sums.size, p.size))
    for r, s in enumerate(sums):
        # a = (s + d)/2 and b = (s - d)/2 must both be grid indices
        span = (n - 1) - abs(s - (n - 1))
        d = np.arange(-span, span + 1, 2)
        a = (s + d) // 2
        b = (s - d) // 2
        kern = np.sum(u[:, a] * B[:, b], axis=0)
        phase = np.exp(-2j * np.outer(p, d * half))
        values[r] = np.real(phase @ kern) * grid.dx / pi
    x_axis = grid.x_min + sums * half
    return WignerMap(x_axis, p, values)


def state_fidelity(state: QuantumState, target_psi: GridFunction,
                   basis: BasisTransform) -> float:
    """``sqrt(<psi|rho|psi>)`` with ``psi`` projected onto the Fock basis."""
    check_same_grid(target_psi.grid, basis.grid, "target and basis grids")
    basis._check(state)
    c = basis.to_fock(target_psi.normalized().values)
    f2 = float(np.real(c.conj() @ state.rho_fock @ c))
    return float(np.sqrt(min(max(f2, 0.0), 1.0)))


def purity(state: QuantumState) -> float:
    r = state.rho_fock
    return float(np.real(np.sum(r * r.T)))
