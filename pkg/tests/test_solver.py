"""Grid geometry, discrete energy/gradient, descent, and diagnostics."""

from math import pi, sqrt

import numpy as np
import pytest

from ldglab.boundary_data import constant_trace, tangent_trace
from ldglab.errors import (
    BadBoundary,
    BallOutsideDomain,
    Diverged,
    InvalidSpec,
    NormViolation,
    TooCloseToBoundary,
    Unconverged,
)
from ldglab.solver import (
    Ball,
    Cylinder,
    EquivariantField,
    HalfSliceGrid,
    Singularity,
    SolverConfig,
    SolverRun,
    _disc_rect_area,
    apply_trace,
    detect_singularities,
    discrete_energy,
    discrete_gradient,
    field_from_csv,
    field_to_csv,
    fit_tangent_map,
    minimize,
    monotonicity_profile,
    reduce_max,
    reduce_sum,
    sample_field,
)

E0 = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
SQRT6 = sqrt(6.0)


def tangent_values(alpha=0.0, sign=1, center=0.0):
    def fn(r, z):
        th = np.arctan2(r, z - center)
        out = np.zeros(np.shape(r) + (5,))
        out[..., 0] = sign * np.cos(th)
        out[..., 1] = sign * np.cos(alpha) * np.sin(th)
        out[..., 2] = sign * np.sin(alpha) * np.sin(th)
        return out
    return fn


def hedgehog_values(r, z):
    th = np.arctan2(r, z)
    s, c = np.sin(th), np.cos(th)
    out = np.zeros(np.shape(r) + (5,))
    out[..., 0] = 0.5 * (3.0 * c * c - 1.0)
    out[..., 1] = sqrt(3.0) * s * c
    out[..., 3] = 0.5 * sqrt(3.0) * s * s
    return out


def constant_values(coords):
    coords = np.asarray(coords, dtype=float)

    def fn(r, z):
        return np.broadcast_to(coords, np.shape(r) + (5,)).copy()
    return fn


def synthetic_run(grid, field, lam=0.0, penalty_eps=None, converged=True):
    cfg = SolverConfig(lam=lam, penalty_eps=penalty_eps)
    e = discrete_energy(field, lam, penalty_eps)
    return SolverRun(grid=grid, config=cfg, trace=None, field=field,
                     energy_history=np.array([e]), grad_history=np.array([0.0]),
                     converged=converged, iterations=0, wall_time=0.0)


@pytest.fixture(scope="module")
def ball48():
    return HalfSliceGrid(Ball(1.0), 48, 96)


@pytest.fixture(scope="module")
def baseline_run(ball48):
    trace = tangent_trace(ball48, 0.0)
    cfg = SolverConfig(lam=0.0, grad_tol=1e-5, max_iters=30000)
    run = minimize(ball48, trace, cfg)
    assert run.converged
    return run


# --- disc clipping -----------------------------------------------------------

def test_disc_rect_area_known_values():
    assert _disc_rect_area(1.0, 0.0, 1.0, 0.0, 1.0) == pytest.approx(pi / 4, abs=1e-14)
    assert _disc_rect_area(1.0, 0.0, 1.0, -1.0, 1.0) == pytest.approx(pi / 2, abs=1e-14)
    assert _disc_rect_area(2.0, 0.0, 2.0, -2.0, 2.0) == pytest.approx(2 * pi, abs=1e-13)
    assert _disc_rect_area(1.0, 1.0, 2.0, -1.0, 1.0) == 0.0
    assert _disc_rect_area(1.0, 0.0, 0.5, 2.0, 3.0) == 0.0


def test_disc_rect_area_additive():
    whole = _disc_rect_area(1.0, 0.2, 0.8, -0.5, 0.9)
    parts = _disc_rect_area(1.0, 0.2, 0.8, -0.5, 0.3) \
        + _disc_rect_area(1.0, 0.2, 0.8, 0.3, 0.9)
    assert whole == pytest.approx(parts, abs=1e-14)
    # a rectangle fully inside the disc keeps its exact area
    assert _disc_rect_area(1.0, 0.3, 0.6, -0.2, 0.4) == pytest.approx(0.18, abs=1e-15)
    # one straddling the circle keeps strictly less
    straddle = _disc_rect_area(1.0, 0.7, 1.0, 0.5, 0.8)
    assert 0.0 < straddle < 0.3 * 0.3


# --- grid construction -------------------------------------------------------

def test_grid_staggered_and_positive(ball48):
    g = ball48
    assert g.r[0] == pytest.approx(0.5 * g.dr)
    assert g.z[0] == pytest.approx(g.z_lo + 0.5 * g.dz)
    assert np.all(g.r > 0.0)
    assert not np.any(g.active & g.boundary)


def test_grid_weights_and_volume(ball48):
    g = ball48
    w = g.weight[g.active]
    assert np.all(w > 0.05)
    assert np.all(w <= 1.0)
    vol = 2 * pi * np.sum(g.weight * g.r[None, :]) * g.dr * g.dz
    assert vol == pytest.approx(4 * pi / 3, rel=0.02)
    # cells far from the boundary carry exactly unit weight
    interior = g.active & (np.hypot(*np.meshgrid(g.r, g.z)) < 0.8)
    assert np.all(g.weight[interior] == 1.0)


def test_grid_boundary_ring(ball48):
    g = ball48
    # every existing array-neighbor of an active node carries a value, so the
    # stencil never reads an undefined node (the axis has no -r neighbor)
    jj, ii = np.nonzero(g.active)
    for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        j, i = jj + dj, ii + di
        ok = (j >= 0) & (j < g.n_z) & (i >= 0) & (i < g.n_r)
        assert np.all(g.defined[j[ok], i[ok]])
    # boundary sample points sit on the sphere
    norms = np.hypot(g.boundary_points[:, 0], g.boundary_points[:, 1])
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_grid_row_contiguity_enforced():
    ok = np.zeros((8, 8), dtype=bool)
    ok[2:6, 0:5] = True
    HalfSliceGrid.from_mask(ok, 0.1, 0.1)  # fine
    bad = ok.copy()
    bad[3, 2] = False
    with pytest.raises(InvalidSpec):
        HalfSliceGrid.from_mask(bad, 0.1, 0.1)


def test_cylinder_grid_flush_boundary():
    g = HalfSliceGrid(Cylinder(1.0, 2.0), 16, 32)
    assert np.all(g.weight[g.active] == 1.0)
    # outermost layer is boundary, one layer in is active
    assert not g.active[:, -1].any()
    assert not g.active[0, :].any()
    assert g.active[1:-1, :-1].all()
    rim = g.boundary_index[:, 1] == g.n_r - 1
    assert np.all(g.boundary_points[rim, 0] == 1.0)


def test_grid_too_coarse():
    with pytest.raises(InvalidSpec):
        HalfSliceGrid(Ball(1.0), 2, 4)


# --- discrete energy ---------------------------------------------------------

def test_constant_e0_energy_zero(ball48):
    f = sample_field(ball48, constant_values(E0))
    assert abs(discrete_energy(f, 0.0)) <= 1e-12
    assert abs(discrete_energy(f, 4.0)) <= 1e-12


def test_negative_e0_potential_is_exact(ball48):
    # W(-e0) = 2/(3 sqrt6) exactly, and the density is constant, so the
    # discrete energy must equal lam * W * discrete volume to roundoff.
    g = ball48
    f = sample_field(g, constant_values(-E0))
    lam = 3.5
    vol = 2 * pi * reduce_sum(g.weight * g.r[None, :]) * g.dr * g.dz
    expected = lam * 2.0 / (3.0 * SQRT6) * vol
    assert discrete_energy(f, lam) == pytest.approx(expected, rel=1e-12)


def test_tangent_map_energy_quantized():
    g = HalfSliceGrid(Ball(1.0), 256, 512)
    e = discrete_energy(sample_field(g, tangent_values()), 0.0)
    assert e == pytest.approx(4 * pi, rel=0.02)


def test_hedgehog_energy_quantized():
    g = HalfSliceGrid(Ball(1.0), 256, 512)
    e = discrete_energy(sample_field(g, hedgehog_values), 0.0)
    assert e == pytest.approx(12 * pi, rel=0.02)


def test_energy_first_order_refinement():
    errs = []
    for n in (64, 128, 256):
        g = HalfSliceGrid(Ball(1.0), n, 2 * n)
        e = discrete_energy(sample_field(g, tangent_values()), 0.0)
        errs.append(abs(e - 4 * pi) / (4 * pi))
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert 0.3 < errs[1] / errs[0] < 0.7
    assert 0.3 < errs[2] / errs[1] < 0.7


def test_norm_violation_hard_mode(ball48):
    f = sample_field(ball48, constant_values(E0))
    f.values[ball48.active] *= 1.0 + 1e-6
    with pytest.raises(NormViolation):
        discrete_energy(f, 0.0)
    with pytest.raises(NormViolation):
        discrete_gradient(f, 0.0)
    # penalty mode accepts any norm
    discrete_energy(f, 0.0, penalty_eps=0.1)


def test_energy_rejects_negative_lambda(ball48):
    f = sample_field(ball48, constant_values(E0))
    with pytest.raises(InvalidSpec):
        discrete_energy(f, -1.0)


# --- discrete gradient -------------------------------------------------------

def test_gradient_matches_fd_penalty_mode():
    rng = np.random.default_rng(11)
    g = HalfSliceGrid(Ball(1.0), 12, 24)
    vals = np.zeros((g.n_z, g.n_r, 5))
    vals[g.defined] = rng.normal(0.5, 0.3, (int(g.defined.sum()), 5))
    f = EquivariantField(g, vals)
    for lam, eps in ((3.0, 0.2), (0.0, 0.1)):
        grad = discrete_gradient(f, lam, eps, project=False)
        jj, ii = np.nonzero(g.active)
        for k in rng.choice(len(jj), 20, replace=False):
            j, i = jj[k], ii[k]
            c = int(rng.integers(0, 5))
            h = 1e-5
            fp, fm = f.copy(), f.copy()
            fp.values[j, i, c] += h
            fm.values[j, i, c] -= h
            fd = (discrete_energy(fp, lam, eps) - discrete_energy(fm, lam, eps)) / (2 * h)
            assert fd == pytest.approx(grad[j, i, c], rel=1e-6, abs=1e-12)


def test_gradient_matches_fd_hard_mode():
    rng = np.random.default_rng(12)
    g = HalfSliceGrid(Ball(1.0), 12, 24)
    vals = np.zeros((g.n_z, g.n_r, 5))
    vals[g.defined] = rng.normal(0.0, 1.0, (int(g.defined.sum()), 5))
    vals[g.defined] /= np.linalg.norm(vals[g.defined], axis=-1, keepdims=True)
    f = EquivariantField(g, vals)
    for lam in (0.0, 5.0):
        grad = discrete_gradient(f, lam)
        jj, ii = np.nonzero(g.active)
        for k in rng.choice(len(jj), 20, replace=False):
            j, i = jj[k], ii[k]
            v = f.values[j, i]
            d = rng.normal(0.0, 1.0, 5)
            d -= np.dot(d, v) * v
            d /= np.linalg.norm(d)
            h = 1e-4
            fp, fm = f.copy(), f.copy()
            fp.values[j, i] = v + h * d
            fm.values[j, i] = v - h * d
            fd = (discrete_energy(fp, lam) - discrete_energy(fm, lam)) / (2 * h)
            assert fd == pytest.approx(float(np.dot(grad[j, i], d)), rel=1e-6, abs=1e-12)


def test_gradient_tangent_and_support(ball48):
    rng = np.random.default_rng(13)
    vals = np.zeros((ball48.n_z, ball48.n_r, 5))
    vals[ball48.defined] = rng.normal(0.0, 1.0, (int(ball48.defined.sum()), 5))
    vals[ball48.defined] /= np.linalg.norm(vals[ball48.defined], axis=-1, keepdims=True)
    f = EquivariantField(ball48, vals)
    grad = discrete_gradient(f, 5.0)
    dots = np.einsum("jkc,jkc->jk", grad, f.values)
    assert np.max(np.abs(dots[ball48.active])) < 1e-12
    assert np.all(grad[~ball48.active] == 0.0)


def test_gradient_vanishes_at_vacuum(ball48):
    f = sample_field(ball48, constant_values(E0))
    assert np.max(np.abs(discrete_gradient(f, 7.0))) <= 1e-12


# --- deterministic reductions ------------------------------------------------

@pytest.mark.parametrize("size", [5, 4096, 4097, 50000])
def test_reductions_thread_invariant(size):
    rng = np.random.default_rng(size)
    x = rng.normal(0.0, 1.0, size)
    s1, s4 = reduce_sum(x, 1), reduce_sum(x, 4)
    m1, m4 = reduce_max(x, 1), reduce_max(x, 4)
    assert s1 == s4 and m1 == m4
    assert m1 == np.max(x)


# --- minimize ----------------------------------------------------------------

def assert_descent(run):
    e = run.energy_history
    slack = 1e-12 * np.maximum(1.0, np.abs(e[:-1]))
    assert np.all(e[1:] <= e[:-1] + slack)


def test_minimize_constant_boundary_reaches_vacuum(ball48):
    run = minimize(ball48, constant_trace(ball48), SolverConfig(lam=0.0))
    assert run.converged
    assert run.energy <= 1e-8
    assert_descent(run)


def test_minimize_baseline_energy_and_defect(baseline_run):
    run = baseline_run
    assert 0.98 * 4 * pi <= run.energy <= 1.05 * 4 * pi
    sings = detect_singularities(run)
    assert len(sings) == 1
    assert sings[0].sign == 1
    assert abs(sings[0].z) < 0.05
    assert_descent(run)


def test_minimize_histories_lengths(baseline_run):
    run = baseline_run
    assert len(run.energy_history) == run.iterations + 1
    assert len(run.grad_history) == run.iterations + 1  # final check included
    assert run.grad_history[-1] <= run.config.grad_tol


def test_minimize_deterministic_and_thread_invariant(ball48):
    trace = tangent_trace(ball48, 0.0)
    cfg = SolverConfig(lam=1.0, grad_tol=1e-4, max_iters=4000, seed=3)
    runs = [minimize(ball48, trace, cfg),
            minimize(ball48, trace, cfg),
            minimize(ball48, trace, SolverConfig(lam=1.0, grad_tol=1e-4,
                                                 max_iters=4000, seed=3, threads=3))]
    for other in runs[1:]:
        assert np.array_equal(runs[0].energy_history, other.energy_history)
        assert np.array_equal(runs[0].grad_history, other.grad_history)
        assert np.array_equal(runs[0].field.values, other.field.values)


def test_minimize_fixed_step_descends(ball48):
    trace = tangent_trace(ball48, 0.0)
    tau = 0.05 * ball48.dr ** 2
    run = minimize(ball48, trace, SolverConfig(tau=tau, max_iters=200,
                                               grad_tol=1e-9))
    assert_descent(run)
    assert run.energy < run.energy_history[0]


def test_minimize_fixed_step_too_large_diverges(ball48):
    trace = tangent_trace(ball48, 0.0)
    with pytest.raises(Diverged):
        minimize(ball48, trace, SolverConfig(tau=50.0, max_iters=500))


def test_minimize_provided_init(ball48):
    trace = tangent_trace(ball48, 0.0)
    start = sample_field(ball48, tangent_values())
    run = minimize(ball48, trace, SolverConfig(init="provided", grad_tol=1e-5,
                                               max_iters=10000), init_field=start)
    assert run.converged
    assert 0.9 * 4 * pi < run.energy < 1.05 * 4 * pi
    with pytest.raises(InvalidSpec):
        minimize(ball48, trace, SolverConfig(init="provided"))


def test_minimize_rejects_foreign_trace(ball48):
    other = HalfSliceGrid(Ball(1.0), 16, 32)
    trace = tangent_trace(other, 0.0)
    with pytest.raises(BadBoundary):
        minimize(ball48, trace, SolverConfig())


def test_dipole_seed_plants_axis_flips(ball48):
    trace = constant_trace(ball48)
    cfg = SolverConfig(init="dipole", dipole_count=1, max_iters=1, seed=5,
                       grad_tol=1e-30)
    run = minimize(ball48, trace, cfg)
    rows = np.flatnonzero(ball48.defined[:, 0] & ball48.defined[:, 1])
    f0 = 1.5 * run.field.values[rows, 0, 0] - 0.5 * run.field.values[rows, 1, 0]
    flips = np.count_nonzero(f0[:-1] * f0[1:] < 0)
    assert flips >= 2
    assert run.field.norm_violation() <= 1e-12


def test_solver_config_validation():
    with pytest.raises(InvalidSpec):
        SolverConfig(lam=-1.0)
    with pytest.raises(InvalidSpec):
        SolverConfig(penalty_eps=0.0)
    with pytest.raises(InvalidSpec):
        SolverConfig(backtrack_shrink=1.0)
    with pytest.raises(InvalidSpec):
        SolverConfig(init="warmstart")
    with pytest.raises(InvalidSpec):
        SolverConfig(threads=0)


# --- penalty mode ------------------------------------------------------------

def test_penalty_mode_norm_attraction():
    g = HalfSliceGrid(Ball(1.0), 24, 48)
    trace = tangent_trace(g, 0.0)
    worst = []
    for eps in (0.1, 0.05, 0.025):
        cfg = SolverConfig(lam=0.0, penalty_eps=eps, grad_tol=2e-5,
                           max_iters=20000)
        run = minimize(g, trace, cfg)
        assert run.converged
        nsq = np.einsum("jkc,jkc->jk", run.field.values, run.field.values)
        worst.append(float(np.max(np.abs(1.0 - nsq[g.active]))))
        assert_descent(run)
    assert worst[1] < worst[0] and worst[2] < worst[1]


# --- singularity detection ---------------------------------------------------

def test_detect_positive_and_negative(ball48):
    up = synthetic_run(ball48, sample_field(ball48, tangent_values()))
    s = detect_singularities(up)
    assert len(s) == 1 and s[0].sign == 1 and abs(s[0].z) < 1e-10

    down = synthetic_run(ball48, sample_field(ball48, tangent_values(sign=-1)))
    s = detect_singularities(down)
    assert len(s) == 1 and s[0].sign == -1


def test_detect_none_for_hedgehog(ball48):
    run = synthetic_run(ball48, sample_field(ball48, hedgehog_values))
    assert detect_singularities(run) == []


def test_detect_flank_filter(ball48):
    # tiny oscillation of f0 around zero must not register
    def fn(r, z):
        out = np.zeros(np.shape(r) + (5,))
        out[..., 0] = 0.2 * np.sin(4 * np.asarray(z))
        out[..., 1] = np.sqrt(1.0 - out[..., 0] ** 2)
        return out
    run = synthetic_run(ball48, sample_field(ball48, fn))
    assert detect_singularities(run) == []


def test_detect_requires_convergence(ball48):
    run = synthetic_run(ball48, sample_field(ball48, tangent_values()),
                        converged=False)
    with pytest.raises(Unconverged):
        detect_singularities(run)


# --- tangent-map fitting -----------------------------------------------------

def test_fit_recovers_exact_tangent_map(ball48):
    run = synthetic_run(ball48, sample_field(ball48, tangent_values(alpha=pi / 4)))
    sing = detect_singularities(run)[0]
    fit = fit_tangent_map(run, sing, [0.2, 0.4])
    assert fit.sign == 1
    assert fit.alpha == pytest.approx(pi / 4, abs=1e-3)
    assert max(res for _, res in fit.residuals) <= 1e-10


def test_fit_negative_sign(ball48):
    run = synthetic_run(ball48, sample_field(ball48, tangent_values(sign=-1)))
    sing = detect_singularities(run)[0]
    fit = fit_tangent_map(run, sing, [0.2, 0.4])
    assert fit.sign == -1
    assert fit.alpha == pytest.approx(0.0, abs=1e-3)
    assert max(res for _, res in fit.residuals) <= 1e-10


def test_fit_on_minimizer_improves_inward(ball48):
    # with the potential switched on the far field deforms away from the
    # tangent map while the core still approaches it, so the fit improves
    # at smaller radii (at lam=0 the minimizer IS the tangent map everywhere
    # and the residual is pure discretization error, largest at the core)
    trace = tangent_trace(ball48, 0.0)
    run = minimize(ball48, trace, SolverConfig(lam=5.0, grad_tol=2e-5,
                                               max_iters=30000))
    sing = detect_singularities(run)[0]
    fit = fit_tangent_map(run, sing, [0.1, 0.3])
    assert fit.sign == 1
    assert abs(fit.alpha) < 0.05
    assert fit.residual(0.1) < fit.residual(0.3)


def test_fit_too_close_to_boundary(ball48):
    run = synthetic_run(ball48, sample_field(ball48, tangent_values(center=0.7)))
    with pytest.raises(TooCloseToBoundary):
        fit_tangent_map(run, Singularity(0.7, 1), [0.4])


# --- monotonicity profile ----------------------------------------------------

def test_profile_constant_field_zero(ball48):
    run = synthetic_run(ball48, sample_field(ball48, constant_values(E0)))
    prof = monotonicity_profile(run, 0.0, [0.2, 0.5, 0.8])
    assert all(v == 0.0 for _, v in prof)


def test_profile_tangent_map_flat(ball48):
    run = synthetic_run(ball48, sample_field(ball48, tangent_values()))
    prof = monotonicity_profile(run, 0.0, [0.3, 0.5, 0.7, 0.9])
    for _, v in prof:
        assert v == pytest.approx(4 * pi, rel=0.03)


def test_profile_nondecreasing_on_minimizer(baseline_run):
    prof = monotonicity_profile(baseline_run, 0.0,
                                [0.3, 0.45, 0.6, 0.75, 0.9])
    vals = [v for _, v in prof]
    for a, b in zip(vals[:-1], vals[1:]):
        assert b >= a * (1.0 - 0.02)


def test_profile_ball_containment(ball48):
    run = synthetic_run(ball48, sample_field(ball48, constant_values(E0)))
    with pytest.raises(BallOutsideDomain):
        monotonicity_profile(run, 0.0, [1.1])
    with pytest.raises(BallOutsideDomain):
        monotonicity_profile(run, 0.6, [0.5])


# --- CSV round trip ----------------------------------------------------------

def test_field_csv_roundtrip(ball48):
    rng = np.random.default_rng(21)
    vals = np.zeros((ball48.n_z, ball48.n_r, 5))
    vals[ball48.defined] = rng.normal(0.0, 1.0, (int(ball48.defined.sum()), 5))
    f = EquivariantField(ball48, vals)
    text = field_to_csv(f)
    assert text.splitlines()[0] == "r,z,f0,f1re,f1im,f2re,f2im"
    back = field_from_csv(text, ball48)
    assert np.array_equal(back.values, f.values)


def test_field_csv_rejects_garbage(ball48):
    with pytest.raises(InvalidSpec):
        field_from_csv("r,z\n1,2\n", ball48)
    good = field_to_csv(sample_field(ball48, constant_values(E0)))
    clipped = "\n".join(good.splitlines()[:-5]) + "\n"
    with pytest.raises(InvalidSpec):
        field_from_csv(clipped, ball48)


def test_apply_trace_norm_guard(ball48):
    f = sample_field(ball48, constant_values(E0))

    class Fake:
        grid = ball48
        values = np.full((len(ball48.boundary_index), 5), 0.7)

    with pytest.raises(BadBoundary):
        apply_trace(f, Fake())
