"""Qubit amplitude dynamics at fixed resonator position.

At each position ``x`` the qubit obeys

    dc_e/dt = -i lambda0 x c_e - i conj(alpha) c_g
    dc_g/dt = +i lambda0 x c_g - i alpha c_e

starting from ``(c_g, c_e) = (1, 0)``. The pulse is held constant on each
sample interval, where the 2x2 propagator ``exp(-i H dt)`` has the closed
form ``cos(W dt) - i sin(W dt)/W * H`` with ``W^2 = (lambda0 x)^2 + |alpha|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np
from numba import njit

from .core import GridFunction, MeasurementOperator, PositionGrid, Pulse

__all__ = [
    "TwoLevelAmplitudes",
    "propagate_point",
    "realize_operator",
    "analytic_tophat",
    "tophat_pulse",
]


@dataclass(frozen=True)
class TwoLevelAmplitudes:
    c_g: complex
    c_e: complex

    @property
    def norm_error(self) -> float:
        return abs(abs(self.c_g) ** 2 + abs(self.c_e) ** 2 - 1.0)


@njit(cache=True)
def _propagate(samples, dt, detunings, out_e, out_g):
    for j in range(detunings.size):
        d = detunings[j]
        ce = 0j
        cg = 1.0 + 0j
        for k in range(samples.size):
            a = samples[k]
            w = np.sqrt(d * d + a.real * a.real + a.imag * a.imag)
            c = np.cos(w * dt)
            s = np.sin(w * dt) / w if w > 0.0 else dt
            ne = (c - 1j * s * d) * ce - 1j * s * np.conj(a) * cg
            cg = -1j * s * a * ce + (c + 1j * s * d) * cg
            ce = ne
        out_e[j] = ce
        out_g[j] = cg


def _run(pulse: Pulse, x, lambda0_scaled: float):
    x = np.ascontiguousarray(x, dtype=float)
    out_e = np.empty(x.size, complex)
    out_g = np.empty(x.size, complex)
    samples = np.ascontiguousarray(pulse.samples, dtype=complex)
    _propagate(samples, float(pulse.dt), lambda0_scaled * x, out_e, out_g)
    return out_e, out_g


def propagate_point(x: float, pulse: Pulse, lambda0_scaled: float = 1.0) -> TwoLevelAmplitudes:
    """Qubit amplitudes at the end of ``pulse`` for resonator position ``x``."""
    e, g = _run(pulse, np.array([float(x)]), lambda0_scaled)
    return TwoLevelAmplitudes(c_g=complex(g[0]), c_e=complex(e[0]))


def realize_operator(pulse: Pulse, grid: PositionGrid,
                     lambda0_scaled: float = 1.0) -> MeasurementOperator:
    """Measurement operator pair produced by ``pulse`` on every grid point."""
    e, g = _run(pulse, grid.x, lambda0_scaled)
    return MeasurementOperator(GridFunction(grid, e), GridFunction(grid, g))


def analytic_tophat(x, alpha0: float, lambda0: float = 1.0):
    """Excited amplitude after a constant pi-pulse of height ``alpha0``.

    The pulse lasts ``pi / (2 alpha0)``. The magnitude is
    ``(pi/2) sinc[(pi/2) sqrt(1 + (lambda0 x / alpha0)^2)]`` with the
    unnormalized sinc; the phase is ``-i`` for real ``alpha0``.
    """
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    x = np.asarray(x, dtype=float)
    tau = pi / (2 * alpha0)
    w = np.sqrt(alpha0**2 + (lambda0 * x) ** 2)
    # sin(w tau) / w, written with numpy's normalized sinc
    amp = tau * np.sinc(w * tau / pi)
    out = -1j * alpha0 * np.asarray(amp)
    return out if out.ndim else complex(out)


def tophat_pulse(alpha0: float, n_samples: int = 1, t_start: float = 0.0) -> Pulse:
    """Constant real pulse of height ``alpha0`` and area ``pi/2``."""
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    dt = pi / (2 * alpha0) / n_samples
    return Pulse(t_start, dt, np.full(n_samples, alpha0, dtype=complex))
