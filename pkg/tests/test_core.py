from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechstate import (
    DEFAULT_GRID,
    GridFunction,
    GridTooSmallError,
    MeasurementOperator,
    PositionGrid,
    ProtocolResult,
    Pulse,
    QuantumState,
    SystemParams,
    build_basis_transform,
    hermite_functions,
    state_space_grid,
)


def test_system_params_lab_units():
    p = SystemParams.from_lab_units()
    assert p.lambda0 == pytest.approx(2 * pi * 8.5e6)
    assert p.coupling_ratio == pytest.approx(8.5 / 125, rel=1e-12)
    assert p.t2_qubit == pytest.approx(2e-6)


@pytest.mark.parametrize("kw", [
    dict(lambda0=0, omega_m=1, t2_qubit=1, q_mech=1, nbar=0),
    dict(lambda0=1, omega_m=-1, t2_qubit=1, q_mech=1, nbar=0),
    dict(lambda0=1, omega_m=1, t2_qubit=0, q_mech=1, nbar=0),
    dict(lambda0=1, omega_m=1, t2_qubit=1, q_mech=1, nbar=-0.5),
])
def test_system_params_rejects(kw):
    with pytest.raises(ValueError):
        SystemParams(**kw)


def test_grid_invariants():
    g = PositionGrid.symmetric(8, 1024)
    assert g.x[0] == -8 and g.x[-1] == 8
    assert np.allclose(np.diff(g.x), g.dx)
    assert PositionGrid.from_dict(g.to_dict()) == g
    with pytest.raises(ValueError):
        PositionGrid(-1, 2, 10)
    with pytest.raises(ValueError):
        PositionGrid(-1, 1, 1)
    with pytest.raises(ValueError):
        PositionGrid(1, -1, 10)


def test_grid_function_checks():
    g = PositionGrid.symmetric(1, 5)
    with pytest.raises(ValueError):
        GridFunction(g, np.ones(4))
    with pytest.raises(ValueError):
        GridFunction(g, [1, 1, np.nan, 1, 1])
    f = GridFunction(g, np.arange(5.0))
    assert f.normalized().norm() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        f.values[0] = 3


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=50).filter(lambda v: any(abs(z) > 1e-3 for z in v)),
       st.floats(1e-3, 1.0))
def test_pulse_area_normalization(samples, dt):
    p = Pulse(0.0, dt, np.array(samples)).scaled_to_area(pi / 2)
    assert abs(p.area - pi / 2) <= 1e-10
    assert p.duration == pytest.approx(dt * len(samples))


def test_pulse_rejects():
    with pytest.raises(ValueError):
        Pulse(0, 0.0, [1.0])
    with pytest.raises(ValueError):
        Pulse(0, 0.1, [np.inf])
    with pytest.raises(ValueError):
        Pulse(0, 0.1, [0.0]).scaled_to_area()


def test_measurement_operator_completeness():
    g = PositionGrid.symmetric(1, 4)
    e = GridFunction(g, [0.6, 0.8j, 0, 1])
    ok = MeasurementOperator(e, GridFunction(g, [0.8, 0.6, 1, 0]))
    assert ok.completeness_error() < 1e-15
    with pytest.raises(ValueError):
        MeasurementOperator(e, GridFunction(g, [0.8, 0.6, 1, 0.1]))


def test_quantum_state_validation():
    QuantumState.fock(2, 5)
    with pytest.raises(ValueError):
        QuantumState(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        QuantumState(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValueError):
        QuantumState(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        QuantumState.fock(6, 5)
    s = QuantumState.pure([1, 1j])
    assert np.trace(s.rho_fock).real == pytest.approx(1.0)


def test_hermite_orthonormal_large_n():
    grid = state_space_grid(700)
    u = hermite_functions(700, grid.x)
    gram = u @ u.T * grid.dx
    assert np.max(np.abs(gram - np.eye(701))) < 1e-10


@given(st.integers(0, 40), st.floats(-6, 6))
def test_hermite_matches_closed_form(n, x):
    from numpy.polynomial.hermite import hermval
    from scipy.special import factorial
    ref = hermval(x, [0] * n + [1]) * np.exp(-x * x / 2) / np.sqrt(
        2.0**n * factorial(n) * np.sqrt(pi))
    got = hermite_functions(n, [x])[n, 0]
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_fock3_has_three_nodes():
    v = hermite_functions(3, DEFAULT_GRID.x)[3]
    assert np.count_nonzero(np.diff(np.sign(v[np.abs(v) > 1e-12]))) == 3


def test_basis_grid_too_small():
    with pytest.raises(GridTooSmallError, match="psi_"):
        build_basis_transform(DEFAULT_GRID, 80)
    b = build_basis_transform(state_space_grid(80), 80)
    c = np.zeros(81)
    c[4] = 1
    assert np.allclose(b.to_fock(b.to_position(c)), c, atol=1e-12)


def test_protocol_result_ranges():
    s = QuantumState.fock(0, 2)
    r = ProtocolResult(s, [0.5, 0.2], 0.9)
    assert r.joint_probability == pytest.approx(0.1)
    with pytest.raises(ValueError):
        ProtocolResult(s, [1.5], 0.9)
    with pytest.raises(ValueError):
        ProtocolResult(s, [0.5], 1.2)


def test_basis_examples():
    b = build_basis_transform(state_space_grid(80), 80)
    x, u, dx = b.grid.x, b.u, b.grid.dx
    assert np.allclose(u[0], np.exp(-x**2 / 2) / pi**0.25, atol=1e-14)
    assert x[np.argmax(u[0])] == pytest.approx(0, abs=dx)
    assert abs(np.sum(u[3] * u[5]) * dx) < 1e-6
    u10 = hermite_functions(10, DEFAULT_GRID.x)[10]
    assert np.sum(u10**2) * DEFAULT_GRID.dx == pytest.approx(1.0, abs=1e-6)
    marginal = np.abs(b.to_position(np.eye(81)[0])) ** 2
    assert np.sum(marginal) * dx == pytest.approx(1.0, abs=1e-6)
