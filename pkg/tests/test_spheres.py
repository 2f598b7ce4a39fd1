import math
from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _battery import CATALOG, PHI, THETAS
from ldglab.errors import BothZero, InvalidSpec, PoleProximity, ZeroVector
from ldglab.spheres import (
    VERONESE,
    ConformalityReport,
    LiftResult,
    S2Point,
    SphereSpec,
    TwistorCurve,
    canonical_rep,
    conformality_gap,
    energy_density,
    eval_sphere,
    horizontality_residual,
    profile_batch,
    projective_distance,
    sphere_energy,
    sphere_profile,
    stereo2,
    stereo2_inv,
    stereo4,
    stereo4_inv,
    tension_residual,
    twistor_curve_eval,
    twistor_lift,
    twistor_project,
)
from ldglab.tensor_core import SplitPoint, join_iota, rotate, split_iota

interior_theta = st.floats(min_value=0.05, max_value=pi - 0.05)
azimuth = st.floats(min_value=0.0, max_value=2.0 * pi)


def split_dist(a: SplitPoint, b: SplitPoint) -> float:
    return abs(a.t - b.t) + abs(a.zeta1 - b.zeta1) + abs(a.zeta2 - b.zeta2)


# --- points and charts -------------------------------------------------------

@given(interior_theta, azimuth)
def test_s2point_angle_roundtrip(theta, phi):
    p = S2Point.from_angles(theta, phi)
    th, ph = p.angles
    assert th == pytest.approx(theta, abs=1e-12)
    assert math.cos(ph - phi) == pytest.approx(1.0, abs=1e-12)
    q = S2Point.from_vector(p.vector)
    assert np.allclose(q.vector, p.vector, atol=1e-12)


def test_s2point_rejects_double_zero():
    with pytest.raises(BothZero):
        S2Point(0.0, 0.0)


def test_s2point_poles():
    assert np.allclose(S2Point(1.0, 0.0).vector, [0, 0, 1])
    assert np.allclose(S2Point(0.0, 1.0).vector, [0, 0, -1])
    assert np.allclose(S2Point.from_complex(complex(np.inf, 0)).vector, [0, 0, -1])


@given(interior_theta, azimuth)
def test_stereo2_roundtrip_and_chart(theta, phi):
    x = S2Point.from_angles(theta, phi).vector
    z = stereo2(x)
    assert z == pytest.approx(math.tan(theta / 2.0) * np.exp(1j * phi), rel=1e-10)
    assert np.allclose(stereo2_inv(z), x, atol=1e-12)


def test_stereo2_south_pole():
    assert np.isinf(stereo2([0.0, 0.0, -1.0]).real)
    assert np.allclose(stereo2_inv(complex(np.inf, 0.0)), [0.0, 0.0, -1.0])


@given(interior_theta, azimuth, st.floats(min_value=0.0, max_value=2.0 * pi))
def test_stereo2_equivariance(theta, phi, alpha):
    # rotating the sphere about the vertical axis multiplies the chart by a phase
    x = S2Point.from_angles(theta, phi).vector
    c, s = math.cos(alpha), math.sin(alpha)
    rx = np.array([c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]])
    assert stereo2(rx) == pytest.approx(np.exp(1j * alpha) * stereo2(x), rel=1e-9)


def test_stereo4_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        v = rng.normal(size=5)
        v /= np.linalg.norm(v)
        if v[0] < -0.9:
            v = -v
        p = SplitPoint(v[0], complex(v[1], v[2]), complex(v[3], v[4]))
        q = stereo4_inv(*stereo4(p))
        assert split_dist(p, q) < 1e-12
    north = stereo4_inv(0.0, 0.0)
    assert split_dist(north, SplitPoint(1.0, 0.0, 0.0)) == 0.0


# --- catalog evaluation ------------------------------------------------------

def test_spec_validation():
    with pytest.raises(InvalidSpec):
        SphereSpec.degenerate(3, 1.0)
    with pytest.raises(InvalidSpec):
        SphereSpec.degenerate(1, 0.0)
    with pytest.raises(InvalidSpec):
        SphereSpec.degenerate(1, 1.0, sign=2)
    with pytest.raises(InvalidSpec):
        SphereSpec.equatorial(0)
    with pytest.raises(InvalidSpec):
        SphereSpec(kind="nonsense")
    assert SphereSpec.full(1, 1).linearly_full
    assert not SphereSpec.full(0, 1).linearly_full
    assert not SphereSpec.degenerate(1, 2.0).linearly_full


def test_full_fixes_both_poles():
    for s in [VERONESE, SphereSpec.full(1, 1), SphereSpec.full(0.3, 2.0 - 1.0j)]:
        for p in [S2Point(1.0, 0.0), S2Point(0.0, 1.0)]:
            w = eval_sphere(s, p)
            assert split_dist(w, SplitPoint(1.0, 0.0, 0.0)) < 1e-14


def test_veronese_equator_value():
    w = eval_sphere(VERONESE, S2Point.from_angles(pi / 2, 0.0))
    assert w.t == pytest.approx(-0.5, abs=1e-14)
    assert abs(w.zeta1) < 1e-14
    assert w.zeta2 == pytest.approx(sqrt(3.0) / 2.0, abs=1e-14)


def test_veronese_profile_closed_form():
    for theta in np.linspace(0.1, pi - 0.1, 25):
        p0, p1, p2 = sphere_profile(VERONESE, theta)
        s, c = math.sin(theta), math.cos(theta)
        assert p0 == pytest.approx(1.0 - 1.5 * s * s, abs=1e-13)
        assert p1 == pytest.approx(sqrt(3.0) * s * c, abs=1e-13)
        assert p2 == pytest.approx(sqrt(3.0) / 2.0 * s * s, abs=1e-13)
        # the conformality reduction behind the energy quadrature
        assert abs(p1) ** 2 + 4.0 * abs(p2) ** 2 == pytest.approx(3.0 * s * s, abs=1e-12)


@given(interior_theta, azimuth)
def test_degenerate_identity_map(theta, phi):
    w = eval_sphere(SphereSpec.degenerate(1, 1.0), S2Point.from_angles(theta, phi))
    expect = SplitPoint(math.cos(theta), math.sin(theta) * np.exp(1j * phi), 0.0)
    assert split_dist(w, expect) < 1e-12


def test_degenerate_two_profile_modulus():
    mu = 1.7 - 0.6j
    s = SphereSpec.degenerate(2, mu)
    for theta in [0.4, 1.0, 2.0, 2.9]:
        t = math.tan(theta / 2.0)
        _, p1, p2 = sphere_profile(s, theta)
        assert p1 == 0.0
        expect = 2.0 * abs(mu) * t * t / (1.0 + abs(mu) ** 2 * t**4)
        assert abs(p2) == pytest.approx(expect, abs=1e-12)


def test_degenerate_sign_flip():
    p = S2Point.from_angles(1.1, 0.7)
    plus = eval_sphere(SphereSpec.degenerate(2, 0.9, 1), p)
    minus = eval_sphere(SphereSpec.degenerate(2, 0.9, -1), p)
    assert split_dist(minus, SplitPoint(-plus.t, -plus.zeta1, -plus.zeta2)) < 1e-15


def test_equatorial_is_unit_parameter_degenerate():
    p = S2Point.from_angles(2.2, 4.0)
    for k in (1, 2):
        a = eval_sphere(SphereSpec.equatorial(k), p)
        b = eval_sphere(SphereSpec.degenerate(k, 1.0), p)
        assert split_dist(a, b) == 0.0


@pytest.mark.parametrize("s", CATALOG)
@given(theta=interior_theta, phi=azimuth)
@settings(max_examples=25, deadline=None)
def test_unit_norm_and_phase_equivariance(s, theta, phi):
    w = eval_sphere(s, S2Point.from_angles(theta, phi))
    assert w.norm == pytest.approx(1.0, abs=1e-12)
    base = eval_sphere(s, S2Point.from_angles(theta, 0.0))
    assert w.t == pytest.approx(base.t, abs=1e-12)
    assert w.zeta1 == pytest.approx(base.zeta1 * np.exp(1j * phi), abs=1e-11)
    assert w.zeta2 == pytest.approx(base.zeta2 * np.exp(2j * phi), abs=1e-11)


def test_sphere_rotation_matches_tensor_rotation():
    # rotating the source about the axis acts on the image tensor by rotate()
    s = SphereSpec.full(1.0, 0.7 + 0.2j)
    theta, phi, alpha = 1.3, 0.4, 0.9
    w = eval_sphere(s, S2Point.from_angles(theta, phi))
    q = rotate(join_iota(eval_sphere(s, S2Point.from_angles(theta, 0.0))), alpha=phi)
    assert split_dist(w, split_iota(q)) < 1e-12


def test_profile_batch_matches_pointwise():
    thetas = np.linspace(0.05, pi - 0.05, 40)
    for s in CATALOG:
        p0, p1, p2 = profile_batch(s, thetas)
        for i, th in enumerate(thetas):
            q0, q1, q2 = sphere_profile(s, th)
            assert abs(p0[i] - q0) < 1e-14
            assert abs(p1[i] - q1) < 1e-14
            assert abs(p2[i] - q2) < 1e-14


# --- energy ------------------------------------------------------------------

def test_energy_quantization_random_draws():
    rng = np.random.default_rng(2024)

    def draw_mu():
        return rng.uniform(0.4, 2.2) * np.exp(1j * rng.uniform(0, 2 * pi))

    for _ in range(10):
        e1 = sphere_energy(SphereSpec.degenerate(1, draw_mu(), rng.choice([1, -1])))
        assert e1 == pytest.approx(4.0 * pi, rel=1e-4)
        e2 = sphere_energy(SphereSpec.degenerate(2, draw_mu(), rng.choice([1, -1])))
        assert e2 == pytest.approx(8.0 * pi, rel=1e-4)
        ef = sphere_energy(SphereSpec.full(draw_mu(), draw_mu()))
        assert ef == pytest.approx(12.0 * pi, rel=1e-4)


def test_energy_equatorial_and_expected():
    assert sphere_energy(SphereSpec.equatorial(1)) == pytest.approx(4 * pi, rel=1e-6)
    assert sphere_energy(SphereSpec.equatorial(2)) == pytest.approx(8 * pi, rel=1e-6)
    assert SphereSpec.equatorial(2).energy_expected == pytest.approx(8 * pi)
    assert VERONESE.energy_expected == pytest.approx(12 * pi)
    assert SphereSpec.full(0.0, 1.5).energy_expected == pytest.approx(8 * pi)
    assert SphereSpec.full(1.5, 0.0).energy_expected == pytest.approx(4 * pi)


def test_energy_rejects_tiny_quadrature():
    with pytest.raises(ValueError):
        sphere_energy(VERONESE, n_quad=16)


def test_energy_density_constant_for_veronese():
    for theta in np.linspace(0.15, pi - 0.15, 20):
        assert energy_density(VERONESE, theta) == pytest.approx(6.0, abs=1e-6)


def test_energy_density_constant_for_equator_map():
    for theta in np.linspace(0.2, pi - 0.2, 10):
        assert energy_density(SphereSpec.equatorial(1), theta) == pytest.approx(2.0, abs=1e-6)


def test_energy_density_pole_guard():
    with pytest.raises(PoleProximity):
        energy_density(VERONESE, 1e-6)


# --- pointwise identities ----------------------------------------------------

@pytest.mark.parametrize("s", CATALOG)
def test_tension_residual_small(s):
    for theta in THETAS:
        assert tension_residual(s, theta, PHI) <= 1e-5


def test_tension_guards():
    with pytest.raises(PoleProximity):
        tension_residual(VERONESE, 5e-3, 0.0, h=1e-3)
    with pytest.raises(ValueError):
        tension_residual(VERONESE, 1.0, 0.0, h=1.0)
    with pytest.raises(ValueError):
        tension_residual(VERONESE, 1.0, 0.0, h=1e-7)


@pytest.mark.parametrize("s", CATALOG)
def test_conformality_and_isotropy(s):
    for theta in THETAS:
        rep = conformality_gap(s, theta, PHI)
        assert isinstance(rep, ConformalityReport)
        assert rep.theta_gap <= 2e-5
        assert rep.cross_gap <= 1e-10
        assert rep.conf_residual <= 1e-6
        assert rep.iso_residual <= 1e-6


# --- twistor machinery -------------------------------------------------------

def test_twistor_curve_validation():
    with pytest.raises(InvalidSpec):
        TwistorCurve((1.0, 2.0))
    with pytest.raises(InvalidSpec):
        TwistorCurve((0.0, 1.0, 0.0, 0.0))
    assert TwistorCurve((1.0, 3.0, 1.0, -1.0)).horizontal
    assert not TwistorCurve((1.0, 1.0, 1.0, 1.0)).horizontal


def test_horizontality_residual():
    alg, contact = horizontality_residual(
        TwistorCurve((1.0, 1.2, 0.8 - 0.1j, -(1.2 * (0.8 - 0.1j)) / 3.0)), n_samples=40)
    assert alg <= 1e-12
    assert contact <= 1e-12
    alg, contact = horizontality_residual(TwistorCurve((1.0, 1.0, 1.0, 1.0)), n_samples=10)
    assert alg == pytest.approx(4.0 / 3.0, abs=1e-14)
    assert contact > 1e-3
    alg, none = horizontality_residual(TwistorCurve((1.0, 1.0, 1.0, 1.0)))
    assert none is None


def test_twistor_project_values():
    w = twistor_project(np.array([1.0, 0, 0, 0]))
    assert split_dist(w, SplitPoint(1.0, 0.0, 0.0)) == 0.0
    w = twistor_project(np.array([0, 1.0, 0, 0]))
    assert split_dist(w, SplitPoint(-1.0, 0.0, 0.0)) == 0.0
    with pytest.raises(ZeroVector):
        twistor_project(np.zeros(4))


@given(theta=interior_theta, phi=azimuth)
@settings(max_examples=50, deadline=None)
def test_twistor_project_unit_norm(theta, phi):
    rng = np.random.default_rng(int(theta * 1e6))
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert twistor_project(w).norm == pytest.approx(1.0, abs=1e-12)


def test_canonical_rep():
    w = np.array([0.0, 1.0 + 1.0j, 2.0, 0.0])
    c = canonical_rep(w)
    assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-14)
    assert abs(c[1].imag) < 1e-14 and c[1].real > 0
    d = canonical_rep(np.exp(0.7j) * w)
    assert np.allclose(c, d, atol=1e-14)
    with pytest.raises(ZeroVector):
        canonical_rep(np.zeros(4))
    assert projective_distance(w, np.exp(1.1j) * w) < 1e-12


def test_projection_of_curve_matches_catalog():
    # tau composed with the horizontal curve reproduces the closed-form family
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        mu1 = rng.normal() + 1j * rng.normal()
        mu2 = rng.normal() + 1j * rng.normal()
        if abs(mu1) < 1e-3 or abs(mu2) < 1e-3:
            continue
        curve = TwistorCurve((1.0, mu1, mu2, -mu1 * mu2 / 3.0))
        assert curve.horizontal
        spec = SphereSpec.full(mu1, mu2)
        for _ in range(50):
            p = S2Point.from_angles(rng.uniform(0.01, pi - 0.01), rng.uniform(0, 2 * pi))
            via_curve = twistor_project(twistor_curve_eval(curve, p))
            direct = eval_sphere(spec, p)
            worst = max(worst, split_dist(via_curve, direct))
    assert worst <= 1e-12


def test_lift_round_trip():
    rng = np.random.default_rng(17)
    for s in [VERONESE, SphereSpec.full(1.0, 1.0)]:
        for _ in range(20):
            z = rng.uniform(0.2, 2.5) * np.exp(1j * rng.uniform(0, 2 * pi))
            lift = twistor_lift(s, z)
            assert isinstance(lift, LiftResult)
            assert lift.sign == 1
            back = twistor_project(lift.w)
            direct = eval_sphere(s, S2Point.from_complex(z))
            assert split_dist(back, direct) <= 1e-4


def test_lift_recovers_generating_curve():
    rng = np.random.default_rng(23)
    for s in [VERONESE, SphereSpec.full(0.8 - 0.3j, 1.1)]:
        curve = TwistorCurve((1.0, s.mu1, s.mu2, -s.mu1 * s.mu2 / 3.0))
        for _ in range(10):
            z = rng.uniform(0.3, 2.0) * np.exp(1j * rng.uniform(0, 2 * pi))
            lift = twistor_lift(s, z)
            p = S2Point.from_complex(z)
            assert projective_distance(lift.w, twistor_curve_eval(curve, p)) <= 1e-6


def test_lift_guards(monkeypatch):
    with pytest.raises(InvalidSpec):
        twistor_lift(SphereSpec.degenerate(1, 1.0), 0.5)
    with pytest.raises(InvalidSpec):
        twistor_lift(VERONESE, 0.0)
    from ldglab import spheres as sp
    from ldglab.errors import DegenerateJet
    monkeypatch.setattr(sp, "_xi_eta", lambda s: (lambda z: (0.1 + 0.0j, 0.2 + 0.0j)))
    with pytest.raises(DegenerateJet):
        sp.twistor_lift(VERONESE, 1.0)
