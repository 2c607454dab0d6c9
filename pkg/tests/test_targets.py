from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechstate import DEFAULT_GRID, TargetSpec, parse_target, render_target


@pytest.mark.parametrize("text,kind,params", [
    ("fock:3", "fock", {"n": 3.0}),
    ("fock:n=3", "fock", {"n": 3.0}),
    ("gaussian:s=4", "gaussian", {"s": 4.0}),
    ("cat:d=2,phi=1.5708", "cat", {"d": 2.0, "phi": 1.5708}),
    ("cat", "cat", {"d": 2.0, "phi": pi / 2}),
    ("plane:k=2,lo=-3,hi=3", "plane", {"k": 2.0, "lo": -3.0, "hi": 3.0}),
    ("truncated_plane_wave:k=1", "plane", {"k": 1.0, "lo": -3.0, "hi": 3.0}),
    ("quadratic:xbar=1.5", "quadratic", {"xbar": 1.5}),
    ("two_lobed", "two_lobed", {"sep": 3.0, "width": 0.7}),
])
def test_parse(text, kind, params):
    spec = parse_target(text)
    assert spec.kind == kind
    assert dict(spec.params) == params


@pytest.mark.parametrize("text", ["bogus:1", "fock", "fock:-1", "fock:1.5", "gaussian:s=0",
                                  "plane:lo=3,hi=-3", "fock:m=2", "fock:x", "quadratic:1,2"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_target(text)


@given(st.sampled_from(["fock:2", "gaussian:s=0.3", "cat:d=1.25,phi=-2", "plane:k=0.5",
                        "two_lobed:sep=2", "quadratic:xbar=0.75"]))
def test_str_roundtrip(text):
    spec = parse_target(text)
    assert parse_target(str(spec)) == spec


@pytest.mark.parametrize("text", ["fock:0", "fock:5", "gaussian:s=2", "cat", "plane",
                                  "two_lobed", "quadratic"])
def test_render_normalized(text):
    f = render_target(parse_target(text), DEFAULT_GRID)
    assert f.norm() == pytest.approx(1.0, abs=1e-12)


def test_fock0_has_no_nodes():
    v = render_target(TargetSpec.fock(0), DEFAULT_GRID).values.real
    assert np.all(v > 0)


def test_plane_wave_support():
    spec = parse_target("plane:k=2,lo=-3,hi=3")
    x = DEFAULT_GRID.x
    v = render_target(spec, DEFAULT_GRID).values
    inside = (x >= -3) & (x <= 3)
    assert np.allclose(np.abs(v[inside]), np.abs(v[inside][0]))
    assert not np.any(v[~inside])


def test_cat_relative_phase():
    v = render_target(parse_target("cat:d=2,phi=1.5707963267948966"), DEFAULT_GRID)
    i = int(np.argmin(np.abs(DEFAULT_GRID.x - 2)))
    assert np.angle(v.values[::-1][i] / v.values[i]) == pytest.approx(pi / 2, abs=1e-3)


def test_vanishing_target():
    from mechstate import PositionGrid
    with pytest.raises(ValueError, match="vanishes"):
        render_target(parse_target("plane:lo=5,hi=6"), PositionGrid.symmetric(2, 11))
