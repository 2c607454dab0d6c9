from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechstate import (
    DEFAULT_GRID,
    PositionGrid,
    Pulse,
    analytic_tophat,
    propagate_point,
    realize_operator,
    tophat_pulse,
)

pulses = st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=30).filter(lambda v: any(abs(z) > 1e-2 for z in v))


@pytest.mark.parametrize("alpha0", [0.3, 1.0, 4.0])
@pytest.mark.parametrize("n", [1, 17])
def test_tophat_exact(alpha0, n):
    ups = realize_operator(tophat_pulse(alpha0, n), DEFAULT_GRID).upsilon_e.values
    assert np.max(np.abs(ups - analytic_tophat(DEFAULT_GRID.x, alpha0))) < 1e-12


def test_tophat_magnitude_formula():
    x = np.linspace(-3, 3, 13)
    ref = (pi / 2) * np.abs(np.sinc(0.5 * np.sqrt(1 + x**2)))
    assert np.allclose(np.abs(analytic_tophat(x, 1.0)), ref, atol=1e-15)
    assert analytic_tophat(0.0, 2.0) == pytest.approx(-1j)


def test_zero_coupling_full_transfer():
    ups = realize_operator(tophat_pulse(0.7, 5), DEFAULT_GRID, 0.0).upsilon_e.values
    assert np.allclose(np.abs(ups), 1.0, atol=1e-12)


@given(pulses, st.floats(0.01, 0.5), st.floats(-10, 10))
def test_norm_preserved(samples, dt, x):
    amp = propagate_point(x, Pulse(0.0, dt, samples))
    assert amp.norm_error < 1e-12


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30).filter(lambda v: any(abs(z) > 1e-2 for z in v)),
       st.floats(0.01, 0.5))
def test_real_pulse_symmetry(samples, dt):
    grid = PositionGrid.symmetric(5, 41)
    e = realize_operator(Pulse(0.0, dt, samples), grid).upsilon_e.values
    assert np.allclose(e[::-1], -np.conj(e), atol=1e-12)


@given(pulses, st.floats(0.01, 0.3))
def test_step_halving_is_exact(samples, dt):
    """Splitting every constant segment in two leaves the result unchanged."""
    grid = PositionGrid.symmetric(4, 9)
    a = realize_operator(Pulse(0.0, dt, samples), grid).upsilon_e.values
    b = realize_operator(Pulse(0.0, dt / 2, np.repeat(samples, 2)), grid).upsilon_e.values
    assert np.max(np.abs(a - b)) < 1e-12


def test_time_shift_invariant():
    p = Pulse(0.0, 0.1, [1, 2j, 0.5])
    q = Pulse(-7.3, 0.1, [1, 2j, 0.5])
    assert np.array_equal(realize_operator(p, DEFAULT_GRID).upsilon_e.values,
                          realize_operator(q, DEFAULT_GRID).upsilon_e.values)


def test_point_matches_grid():
    p = Pulse(0.0, 0.05, np.exp(1j * np.linspace(0, 3, 20)))
    op = realize_operator(p, DEFAULT_GRID)
    amp = propagate_point(DEFAULT_GRID.x[100], p)
    assert amp.c_e == op.upsilon_e.values[100]
    assert amp.c_g == op.upsilon_g.values[100]


def test_zero_pulse_stays_in_ground():
    op = realize_operator(Pulse(0.0, 0.1, np.zeros(4)), DEFAULT_GRID)
    assert not np.any(op.upsilon_e.values)
    assert np.allclose(np.abs(op.upsilon_g.values), 1)


def test_tophat_rejects():
    with pytest.raises(ValueError):
        tophat_pulse(0.0)
    with pytest.raises(ValueError):
        analytic_tophat(1.0, -1.0)


def test_point_examples():
    alpha0 = 1.3
    p = tophat_pulse(alpha0, 3)
    assert abs(propagate_point(0.0, p).c_e) == pytest.approx(1.0, abs=1e-12)
    node = propagate_point(np.sqrt(3) * alpha0, p)
    assert abs(node.c_e) < 1e-12
    assert abs(node.c_g) == pytest.approx(1.0)
    quiet = propagate_point(2.5, Pulse(0.0, 0.3, np.zeros(7)))
    assert quiet.c_e == 0 and abs(quiet.c_g) == pytest.approx(1.0, abs=1e-14)


def test_analytic_examples():
    assert abs(analytic_tophat(0.0, 1.0)) == pytest.approx(1.0)
    assert abs(analytic_tophat(2.0, 2.0)) == pytest.approx((pi / 2) * np.sin(pi / np.sqrt(2)) / (pi / np.sqrt(2)))
    assert abs(analytic_tophat(2.0, 2.0)) == pytest.approx(0.5626, abs=1e-4)
    far = np.abs(analytic_tophat(np.array([1e3, 1e5]), 1.0))
    assert far[1] < far[0] < 2e-3


@given(pulses, st.floats(0.01, 0.5))
def test_completeness_any_pulse(samples, dt):
    op = realize_operator(Pulse(0.0, dt, samples), DEFAULT_GRID)
    assert op.completeness_error() <= 1e-9
