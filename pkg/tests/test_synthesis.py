import warnings
from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mechstate import (
    DEFAULT_GRID,
    GridFunction,
    PositionGrid,
    PulseSynthesizer,
    SynthesisConfig,
    SynthesisError,
    SynthesisWarning,
    TargetSpec,
    operator_fidelity,
    optimize_chi,
    parse_target,
    realize_operator,
    render_target,
    synthesize_pulse,
)
from mechstate.synthesis import golden_section_max

FOCK0 = render_target(TargetSpec.fock(0), DEFAULT_GRID)
FOCK3 = render_target(TargetSpec.fock(3), DEFAULT_GRID)


@pytest.fixture(scope="module")
def fock3_opt():
    return optimize_chi(FOCK3)


@pytest.fixture(scope="module")
def two_lobed_opt():
    return optimize_chi(render_target(TargetSpec("two_lobed"), DEFAULT_GRID))


@given(st.floats(0.3, 5.0))
def test_area_is_half_pi(chi):
    p = synthesize_pulse(FOCK0, chi)
    assert abs(p.area - pi / 2) <= 1e-10
    assert p.chi == chi
    # window symmetric about t = 0
    assert p.t_start == pytest.approx(-p.duration / 2)


def test_deterministic():
    a = synthesize_pulse(FOCK3, 1.7)
    b = synthesize_pulse(FOCK3, 1.7)
    assert np.array_equal(a.samples, b.samples) and a.dt == b.dt and a.t_start == b.t_start


def test_first_order_mirror_relation():
    """Weak pulses realize the target mirrored, conjugated and scaled by 2/chi."""
    g = DEFAULT_GRID
    target = GridFunction(g, np.exp(-(g.x - 1) ** 2) * np.exp(0.7j * g.x))
    chi = 2.0
    ups = realize_operator(synthesize_pulse(target, chi), g).upsilon_e
    mirrored = GridFunction(g, np.conj(np.exp(-(-g.x - 1) ** 2) * np.exp(-0.7j * g.x)))
    assert operator_fidelity(mirrored, ups) > 0.98
    assert operator_fidelity(target, ups) < 0.5


def test_aliasing_raises():
    coarse = PositionGrid.symmetric(8, 48)
    plane = render_target(parse_target("plane"), coarse)
    with pytest.raises(SynthesisError, match="finer position grid"):
        synthesize_pulse(plane, 4.0)


def test_clipping_warns():
    plane = render_target(parse_target("plane"), DEFAULT_GRID)
    with pytest.warns(SynthesisWarning, match="clipped"):
        p = synthesize_pulse(plane, 2.0)
    assert p.duration <= SynthesisConfig().max_duration + p.dt


def test_zero_target_rejected():
    with pytest.raises(ValueError):
        synthesize_pulse(np.zeros(DEFAULT_GRID.n_points), 1.0)
    with pytest.raises(ValueError):
        synthesize_pulse(FOCK0, -1.0)


@pytest.mark.parametrize("kw", [dict(chi_min=2, chi_max=1), dict(n_scan=3), dict(refine_tol=0),
                                dict(truncation_eps=1.5), dict(max_duration=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SynthesisConfig(**kw)


vectors = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                   min_size=8, max_size=8).filter(lambda v: np.linalg.norm(v) > 1e-3)


@given(vectors, vectors, st.floats(0.1, 10), st.floats(-pi, pi))
def test_operator_fidelity_properties(a, b, scale, phase):
    g = PositionGrid.symmetric(1, 8)
    fa, fb = GridFunction(g, a), GridFunction(g, b)
    f = operator_fidelity(fa, fb)
    assert 0 <= f <= 1 + 1e-12
    assert f == pytest.approx(operator_fidelity(fb, fa), abs=1e-12)
    scaled = GridFunction(g, np.array(b) * scale * np.exp(1j * phase))
    assert operator_fidelity(fa, scaled) == pytest.approx(f, abs=1e-12)
    assert operator_fidelity(fa, fa) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.5, 4.5))
def test_golden_section(center):
    x, fx = golden_section_max(lambda v: -(v - center) ** 2, 0.0, 5.0, 1e-6)
    assert abs(x - center) < 1e-6
    assert fx == pytest.approx(-((x - center) ** 2))


def test_golden_section_prefers_smaller_on_ties():
    x, _ = golden_section_max(lambda v: 1.0, 1.0, 2.0, 1e-3)
    assert x == pytest.approx(1.0, abs=0.4)
    flat = {}
    golden_section_max(lambda v: 1.0, 1.0, 2.0, 1e-3, flat)
    assert x == min(flat)


def test_fock3_optimum(fock3_opt):
    assert fock3_opt.fidelity >= 0.97
    assert 1.5 < fock3_opt.chi < 2.5
    assert not fock3_opt.clipped
    assert max(f for _, f in fock3_opt.scan) <= fock3_opt.fidelity + 1e-12


def test_chi_star_stable_under_refinement(fock3_opt):
    fine = render_target(TargetSpec.fock(3), PositionGrid.symmetric(8, 2048))
    opt = optimize_chi(fine)
    assert abs(opt.chi - fock3_opt.chi) / fock3_opt.chi < 0.01


def test_two_lobed_unimodal(two_lobed_opt):
    f = np.array([s for _, s in two_lobed_opt.scan])
    turns = np.count_nonzero(np.diff(np.sign(np.diff(f))))
    assert turns == 1
    assert two_lobed_opt.fidelity > 0.98


def test_realize_grid(fock3_opt):
    wide = PositionGrid.symmetric(12, 257)
    opt = optimize_chi(FOCK0, realize_grid=wide, config=SynthesisConfig(n_scan=12))
    assert opt.realized.grid == wide


def test_estimator_api(fock3_opt):
    est = PulseSynthesizer(chi=1.9)
    params = est.get_params()
    assert params["chi"] == 1.9 and params["truncation_eps"] == 1e-4
    assert clone(est).get_params() == params
    with pytest.raises(NotFittedError):
        est.transform([0.0])
    est.fit(FOCK3)
    assert est.chi_ == 1.9
    x = DEFAULT_GRID.x
    assert np.array_equal(est.transform(x), est.operator_.upsilon_e.values)
    assert est.score(FOCK3) == pytest.approx(est.fidelity_)
    assert est.fidelity_ <= fock3_opt.fidelity + 1e-9
    with pytest.raises(ValueError):
        PulseSynthesizer(chi=-1).fit(FOCK3)
    with pytest.raises(TypeError):
        PulseSynthesizer(lambda0="x").fit(FOCK3)


def test_estimator_accepts_raw_samples():
    est = PulseSynthesizer(chi=2.0).fit(FOCK0.values)
    assert est.target_.grid == DEFAULT_GRID
    assert est.fidelity_ > 0.99


def test_low_fidelity_warning():
    # restricting chi far below its optimum leaves the target out of reach
    with pytest.warns(SynthesisWarning, match="< 0.5"):
        opt = optimize_chi(FOCK3, config=SynthesisConfig(chi_min=0.2, chi_max=0.4, n_scan=10))
    assert opt.low_fidelity
    assert opt.fidelity < 0.5


def test_sinc_target_gives_tophat():
    g = DEFAULT_GRID
    sinc = GridFunction(g, np.sinc(g.x / 2))  # (pi/2) sinc(pi x / 2) up to scale
    opt = optimize_chi(sinc)
    a = np.abs(opt.pulse.samples)
    core = a > 0.5 * a.max()
    # flat core of width pi/2 in units of 1/lambda0 holding most of the area
    assert core.sum() * opt.pulse.dt == pytest.approx(pi / 2, rel=0.1)
    assert a[core].sum() / a.sum() > 0.9
    assert abs(opt.pulse.area - pi / 2) <= 1e-10
    assert 1.8 < opt.chi < 2.3
    # the small-x expansion inside the sinc caps the round trip just below 0.99
    assert opt.fidelity >= 0.98


def test_gaussian_target_gives_gaussian_pulse():
    s, chi = 2.0, 2.0
    p = synthesize_pulse(render_target(TargetSpec.gaussian(s), DEFAULT_GRID), chi)
    t = p.times + p.dt / 2
    a = np.abs(p.samples)
    keep = a > 1e-3 * a.max()
    slope, _ = np.polyfit(t[keep] ** 2, np.log(a[keep]), 1)
    # transform of exp(-x^2 s^2/4) at frequency chi t is exp(-chi^2 t^2 / s^2)
    assert slope == pytest.approx(-(chi**2) / s**2, rel=1e-6)


@pytest.mark.parametrize("text", ["fock:0", "fock:2", "two_lobed", "quadratic"])
def test_real_even_target_real_even_pulse(text):
    p = synthesize_pulse(render_target(parse_target(text), DEFAULT_GRID), 2.0)
    a = p.samples
    scale = np.max(np.abs(a))
    assert np.max(np.abs(a.imag)) <= 1e-10 * scale
    assert np.max(np.abs(a - a[::-1])) <= 1e-10 * scale


def test_fidelity_even_odd_is_zero():
    g = DEFAULT_GRID
    even = GridFunction(g, np.exp(-g.x**2))
    odd = GridFunction(g, g.x * np.exp(-g.x**2))
    assert operator_fidelity(even, odd) < 1e-12
