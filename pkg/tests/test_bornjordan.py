import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bjlab import (EndpointDivergenceError, PhaseSpacePoint, TauQuadratureSpec, WavepacketSum,
                   annulus_truncation_delta, bj_field, bj_incomplete_point, bj_point,
                   l2_norm_squared, make_F_alpha, make_f_R, make_f_rR, wtau_point)

from oracles import bj_fR_origin_d3

ORIGIN2 = PhaseSpacePoint.origin(2)


def test_annulus_origin_value():
    f = make_f_R(2, math.e)
    r = bj_point(f, f, ORIGIN2)
    assert r.value.real == pytest.approx(2 * math.pi, rel=1e-10)


def test_gaussian_origin_value():
    g = WavepacketSum.gaussian(2)
    assert bj_point(g, g, ORIGIN2).value.real == pytest.approx(math.pi / 2, rel=1e-12)


def test_gaussian_origin_by_tau_quadrature():
    # oracle: integrate the closed-form W_tau(0, 0) over tau with scipy
    from scipy.integrate import quad
    g = WavepacketSum.gaussian(2)
    ref = quad(lambda t: 1.0 / (2 * t * t - 2 * t + 1), 0.0, 1.0, epsabs=1e-14)[0]
    assert bj_point(g, g, ORIGIN2).value.real == pytest.approx(ref, rel=1e-12)


def test_three_dimensional_origin_matches_oracle():
    f = make_f_R(3, 100.0)
    r = bj_point(f, f, PhaseSpacePoint.origin(3))
    ref = bj_fR_origin_d3(100.0)
    assert abs(r.value.real - ref) <= max(r.error + r.tail, 1e-8 * ref)


def test_incomplete_zero_width():
    f = make_f_R(2, 3.0)
    assert bj_incomplete_point(f, f, ORIGIN2, 0.5).value == 0


def test_incomplete_log_ratio():
    delta = 0.1
    f = make_f_R(2, 1 / delta - 2)
    v = bj_incomplete_point(f, f, ORIGIN2, delta).value.real
    assert v / l2_norm_squared(f) == pytest.approx(math.log(8.0), rel=1e-10)


def test_incomplete_rejects_bad_delta():
    f = make_f_R(2, 3.0)
    for delta in (0.0, -0.1, 0.6):
        with pytest.raises(ValueError):
            bj_incomplete_point(f, f, ORIGIN2, delta)


@pytest.mark.parametrize("z", [(0.0, 0.0, 0.0, 0.0), (0.2, -0.1, 0.7, 0.3), (0.0, 0.4, -1.5, 2.0)])
def test_protected_region_truncation_is_exact(z):
    f = make_f_rR(2, 1.0, 4.0)
    rho = 0.5
    delta = annulus_truncation_delta(1.0, 4.0, rho)
    full = bj_point(f, f, z)
    part = bj_incomplete_point(f, f, z, delta * 0.9)
    assert abs(full.value - part.value) <= full.error + full.tail + part.error + 1e-10


def test_delta_exhaustion_stabilises():
    f = make_f_rR(2, 1.0, 4.0)
    z = (0.1, 0.2, 0.5, -0.3)
    d0 = annulus_truncation_delta(1.0, 4.0, 0.5)
    vals = [bj_incomplete_point(f, f, z, d).value for d in (d0, d0 / 2, d0 / 10)]
    assert abs(vals[0] - vals[1]) < 1e-9 and abs(vals[1] - vals[2]) < 1e-9
    outside = bj_incomplete_point(f, f, z, 3 * d0).value
    assert abs(outside - vals[0]) > 1e-6


@pytest.mark.parametrize("r1, r2, rho, expected", [(1.0, 9.0, 0.5, 1 / 20), (2.0, 6.0, 1.0, 1 / 8)])
def test_annulus_truncation_delta(r1, r2, rho, expected):
    assert annulus_truncation_delta(r1, r2, rho) == pytest.approx(expected, rel=1e-15)


def test_annulus_truncation_delta_degenerates():
    assert annulus_truncation_delta(1.0, 1.0001, 1.0 - 1e-9) < 1e-9
    with pytest.raises(ValueError):
        annulus_truncation_delta(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        annulus_truncation_delta(1.0, 2.0, 1.5)


@pytest.mark.parametrize("tau_frac", [0.5, 1.0])
def test_support_vanishing_below_threshold(tau_frac):
    f = make_f_rR(2, 1.0, 3.0)
    delta = annulus_truncation_delta(1.0, 3.0, 0.5)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(-0.35, 0.35, 2)
        xi = rng.uniform(-2.0, 2.0, 2)
        v = wtau_point(f, f, delta * tau_frac, np.concatenate([x, xi])).value
        assert abs(v) < 1e-10


def test_singular_profile_at_origin_raises():
    F = make_F_alpha(3, 1.4)
    with pytest.raises(EndpointDivergenceError, match="diverge"):
        bj_point(F, F, PhaseSpacePoint.origin(3))
    # positive delta is always finite
    v = bj_incomplete_point(F, F, PhaseSpacePoint.origin(3), 0.1).value
    assert math.isfinite(v.real)


points2 = st.tuples(*[st.floats(-1.0, 1.0)] * 4)


@settings(max_examples=15, deadline=None)
@given(z=points2)
def test_real_for_real_signals(z):
    f = make_f_rR(2, 0.5, 2.0)
    r = bj_point(f, f, z)
    assert abs(r.value.imag) < 1e-12 + r.error


@settings(max_examples=15, deadline=None)
@given(z=points2)
def test_cross_conjugate_symmetry(z):
    f = make_f_rR(2, 0.5, 2.0)
    g = WavepacketSum(np.array([[0.3, 0.1, -0.2, 0.4]]), np.array([1.0 + 0.5j]))
    a = WavepacketSum(np.array([[0.0, 0.0, 0.0, 0.0], [0.5, -0.5, 1.0, 0.0]]), np.array([1.0, 0.3j]))
    assert abs(bj_point(a, g, z).value - np.conj(bj_point(g, a, z).value)) < 1e-12
    assert abs(bj_point(f, f, z).value.imag) < 1e-9


def test_l2_contraction_on_grid():
    # d = 1 wavepackets: h^2 sum |W_BJ(f, g)|^2 <= ||f||^2 ||g||^2
    f = WavepacketSum(np.array([[0.0, 0.0], [1.0, 0.5]]), np.array([1.0, -0.7j]))
    g = WavepacketSum(np.array([[0.3, -0.4]]), np.array([0.8]))
    h = 0.05
    ax = np.arange(-6, 6, h) + h / 2
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    for a, b in ((f, f), (f, g), (g, g)):
        w = bj_field(a, b, pts)
        lhs = h * h * np.sum(np.abs(w) ** 2)
        assert lhs <= a.norm_squared() * b.norm_squared() * (1 + 1e-9)


def test_field_matches_points_and_ignores_threads():
    f = make_f_rR(2, 0.5, 2.0)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (12, 4))
    pts[3, :2] = pts[4, :2]
    a = bj_field(f, f, pts, threads=1)
    b = bj_field(f, f, pts, threads=3)
    assert a.tobytes() == b.tobytes()
    for k in (0, 3, 4):
        r = bj_point(f, f, pts[k])
        assert abs(a[k] - r.value) < 1e-9
    assert bj_field(f, f, np.zeros((0, 4))).shape == (0,)


def test_field_for_shifted_profiles_matches_covariance():
    from bjlab import time_frequency_shift
    f = make_f_rR(2, 0.5, 2.0)
    z0 = PhaseSpacePoint((0.3, -0.2), (1.0, 0.5))
    s = time_frequency_shift(f, z0)
    z = np.array([[0.4, 0.1, 0.9, 0.2]])
    assert abs(bj_field(s, s, z)[0] - bj_field(f, f, z - z0.as_array())[0]) < 1e-12


def test_spec_validation():
    with pytest.raises(ValueError):
        TauQuadratureSpec(delta=0.6)
    with pytest.raises(ValueError):
        TauQuadratureSpec(nodes=1)
    with pytest.raises(ValueError):
        TauQuadratureSpec(ratio=1.0)
    with pytest.raises(ValueError, match="cover"):
        TauQuadratureSpec(panels=((0.1, 1.0, 8),))
    with pytest.raises(ValueError, match="contiguous"):
        TauQuadratureSpec(panels=((0.0, 0.4, 8), (0.5, 1.0, 8)))
    with pytest.raises(ValueError, match="node"):
        TauQuadratureSpec(panels=((0.0, 0.5, 1), (0.5, 1.0, 8)))


def test_default_panels_cover_interval():
    for delta in (0.0, 0.01, 0.25):
        p = TauQuadratureSpec(delta=delta).default_panels()
        assert p[0][0] == pytest.approx(delta, abs=1e-15)
        assert p[-1][1] == pytest.approx(1 - delta, abs=1e-15)
        assert all(a[1] == b[0] for a, b in zip(p, p[1:]))


@settings(max_examples=30, deadline=None)
@given(delta=st.floats(0.0, 0.5), nodes=st.integers(2, 64), ratio=st.floats(0.05, 0.95),
       explicit=st.booleans())
def test_spec_json_round_trip(delta, nodes, ratio, explicit):
    panels = None
    if explicit and delta < 0.5:
        mid = 0.5
        panels = ((delta, mid, nodes), (mid, 1.0 - delta, nodes))
    spec = TauQuadratureSpec(delta=delta, nodes=nodes, ratio=ratio, panels=panels)
    back = TauQuadratureSpec.from_json(spec.to_json())
    assert back == spec
    assert json.loads(back.to_json()) == json.loads(spec.to_json())


def test_explicit_panels_are_used():
    g = WavepacketSum.gaussian(2)
    spec = TauQuadratureSpec(panels=((0.0, 0.5, 24), (0.5, 1.0, 24)))
    assert bj_point(g, g, ORIGIN2, spec).value.real == pytest.approx(math.pi / 2, rel=1e-12)
