"""Constrained energy descent for equivariant fields on axisymmetric domains.

An S1-equivariant unit field on a solid of revolution is determined by its
values on the meridian half-slice {(r, z) : r >= 0}; in split coordinates it
is five real functions (f0, Re f1, Im f1, Re f2, Im f2) of (r, z), where f1
and f2 rotate with weight 1 and 2 under the circle action.  The reduced
energy of such a field is

    E = 2 pi  integral  r * [ (|d_r f|^2 + |d_z f|^2)/2
                              + (|f1|^2 + 4 |f2|^2)/(2 r^2)
                              + lambda W(f) + penalty ]  dr dz,

with W the reduced bulk potential.  This module discretizes that integral on
a staggered half-slice grid, evaluates its exact Euclidean gradient, and
minimizes by projected gradient descent with an Armijo line search, either on
the unit sphere (hard constraint, nodewise renormalization) or with a
Ginzburg-Landau norm penalty.  Post-processing extracts axis singularities,
local tangent-map fits, and the scaled energy of balls centered on the axis.

Discrete energy, bit for bit
----------------------------
Nodes sit at cell centers r_i = (i + 1/2) dr, z_j = z_lo + (j + 1/2) dz, so
the axis r = 0 is never a node.  Cells whose center lies strictly inside the
domain and not in the outermost array layer are *active* (unknowns); inactive
cells with an active 4-neighbor are *boundary* (fixed trace values).  Each
active node n contributes

    2 pi * w_n * r_n * dr * dz * [ (1/4) sum_d |f_nb(d) - f_n|^2 / h_d^2
                                   + (|f1|^2 + 4 |f2|^2)/(2 r_n^2)
                                   + potential terms ],

where d runs over the up-to-four neighbor directions whose neighbor holds a
value (active or boundary), h_d is dr or dz, and w_n is the fraction of the
cell inside the domain (computed by exact disc-rectangle clipping for balls,
1 otherwise).  The 1/4 is the product of the energy's 1/2 with the two-sided
average of one-sided difference quotients; a direction with no valued
neighbor is simply omitted (natural condition at the axis).  Sums are
accumulated chunk-by-chunk over a fixed partition so the result is bitwise
independent of the number of worker threads.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from math import asin, ceil, hypot, pi, sqrt
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    BadBoundary,
    BallOutsideDomain,
    Diverged,
    InvalidSpec,
    NormViolation,
    TooCloseToBoundary,
    Unconverged,
)
from .tensor_core import SQRT6, cubic_invariant, cubic_invariant_gradient

TWO_PI = 2.0 * pi

# Fixed reduction chunk (in nodes).  Partial sums are always taken over this
# partition, whether or not they are farmed out to threads, so totals do not
# depend on the thread count.
_CHUNK = 4096

E0_COORDS = np.array([1.0, 0.0, 0.0, 0.0, 0.0])


# --- domains -----------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """Solid ball of the given radius centered at the origin."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidSpec(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Cylinder:
    """Solid cylinder r <= radius, |z| <= height/2."""

    radius: float
    height: float

    def __post_init__(self):
        if not (self.radius > 0.0 and self.height > 0.0):
            raise InvalidSpec("cylinder radius and height must be positive")


@dataclass(frozen=True)
class Mask:
    """Arbitrary axisymmetric domain given by a boolean half-slice raster.

    ``inside[j, i]`` marks the cell at (z_j, r_i); resolution and z-offset are
    supplied when building the grid.
    """

    inside: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.inside, dtype=bool)
        if arr.ndim != 2:
            raise InvalidSpec("mask must be a 2d boolean array")
        object.__setattr__(self, "inside", arr)


def _disc_rect_area(radius: float, r0: float, r1: float, z0: float, z1: float) -> float:
    """Exact area of [r0, r1] x [z0, z1] intersected with the disc of the
    given radius centered at the origin (r may start at 0, never negative)."""
    lo, hi = max(z0, -radius), min(z1, radius)
    if lo >= hi or r0 >= radius:
        return 0.0

    cuts = {lo, hi}
    for rad in (r0, r1):
        if rad <= radius:
            zc = sqrt(radius * radius - rad * rad)
            for c in (-zc, zc):
                if lo < c < hi:
                    cuts.add(c)
    pts = sorted(cuts)

    def chord_int(y: float) -> float:
        # antiderivative of sqrt(radius^2 - y^2)
        return 0.5 * (y * sqrt(max(radius * radius - y * y, 0.0))
                      + radius * radius * asin(max(-1.0, min(1.0, y / radius))))

    area = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (p + q)
        chord = sqrt(max(radius * radius - mid * mid, 0.0))
        if chord <= r0:
            continue
        if chord >= r1:
            area += (r1 - r0) * (q - p)
        else:
            area += chord_int(q) - chord_int(p) - r0 * (q - p)
    return area


class HalfSliceGrid:
    """Staggered finite-difference grid on the meridian half-slice.

    Attributes
    ----------
    r, z            : node center coordinates, shapes (n_r,), (n_z,)
    active          : (n_z, n_r) bool, unknown nodes
    boundary        : (n_z, n_r) bool, fixed-trace nodes
    defined         : active | boundary
    weight          : (n_z, n_r) float, in-domain cell fraction (0 off active)
    boundary_index  : (n_b, 2) int, (j, i) of boundary nodes in a fixed order
    boundary_points : (n_b, 2) float, (r, z) where the trace is sampled
    """

    def __init__(self, domain, n_r: int, n_z: int,
                 dr: float | None = None, dz: float | None = None,
                 z_lo: float | None = None):
        if n_r < 4 or n_z < 4:
            raise InvalidSpec(f"grid too coarse: {n_r} x {n_z}")
        self.domain = domain
        self.n_r = int(n_r)
        self.n_z = int(n_z)

        if isinstance(domain, Ball):
            self.dr = domain.radius / n_r
            self.dz = 2.0 * domain.radius / n_z
            self.z_lo = -domain.radius
        elif isinstance(domain, Cylinder):
            self.dr = domain.radius / n_r
            self.dz = domain.height / n_z
            self.z_lo = -0.5 * domain.height
        elif isinstance(domain, Mask):
            if dr is None or dz is None:
                raise InvalidSpec("mask grids need explicit dr and dz")
            if domain.inside.shape != (n_z, n_r):
                raise InvalidSpec("mask shape does not match n_z x n_r")
            self.dr = float(dr)
            self.dz = float(dz)
            self.z_lo = 0.0 if z_lo is None else float(z_lo)
        else:
            raise InvalidSpec(f"unknown domain {domain!r}")

        self.r = (np.arange(n_r) + 0.5) * self.dr
        self.z = self.z_lo + (np.arange(n_z) + 0.5) * self.dz
        self._classify()

    @classmethod
    def build(cls, domain, n_r: int, n_z: int) -> "HalfSliceGrid":
        return cls(domain, n_r, n_z)

    @classmethod
    def from_mask(cls, inside: np.ndarray, dr: float, dz: float,
                  z_lo: float = 0.0) -> "HalfSliceGrid":
        mask = Mask(np.asarray(inside, dtype=bool))
        n_z, n_r = mask.inside.shape
        return cls(mask, n_r, n_z, dr=dr, dz=dz, z_lo=z_lo)

    # -- construction helpers

    def _inside_mask(self) -> np.ndarray:
        rr, zz = np.meshgrid(self.r, self.z)
        if isinstance(self.domain, Ball):
            return rr * rr + zz * zz < self.domain.radius ** 2
        if isinstance(self.domain, Cylinder):
            return np.ones((self.n_z, self.n_r), dtype=bool)
        return self.domain.inside.copy()

    def _classify(self):
        inside = self._inside_mask()

        # The outermost array layer (except the axis side) can never be an
        # unknown: an in-domain cell there has no room for a fixed neighbor,
        # so it is demoted to a boundary node.
        edge = np.zeros_like(inside)
        edge[0, :] = edge[-1, :] = True
        edge[:, -1] = True

        interior = inside & ~edge
        near = _any_neighbor(interior)
        self.active = interior
        self.boundary = (inside & edge & near) | (~inside & near)
        self.defined = self.active | self.boundary

        for j in range(self.n_z):
            row = np.flatnonzero(self.active[j])
            if row.size and not np.all(np.diff(row) == 1):
                raise InvalidSpec(f"active cells in row {j} are not contiguous")

        self.weight = np.zeros((self.n_z, self.n_r))
        if isinstance(self.domain, Ball):
            radius = self.domain.radius
            half_r, half_z = 0.5 * self.dr, 0.5 * self.dz
            cell = self.dr * self.dz
            for j, i in np.argwhere(self.active):
                r_c, z_c = self.r[i], self.z[j]
                far = hypot(r_c + half_r, abs(z_c) + half_z)
                if far <= radius:
                    self.weight[j, i] = 1.0
                else:
                    self.weight[j, i] = _disc_rect_area(
                        radius, r_c - half_r, r_c + half_r,
                        z_c - half_z, z_c + half_z) / cell
        else:
            self.weight[self.active] = 1.0

        jj, ii = np.nonzero(self.boundary)
        self.boundary_index = np.column_stack([jj, ii])
        pts = np.column_stack([self.r[ii], self.z[jj]]).astype(float)
        if isinstance(self.domain, Ball):
            norms = np.hypot(pts[:, 0], pts[:, 1])
            pts = self.domain.radius * pts / norms[:, None]
        elif isinstance(self.domain, Cylinder):
            pts[:, 0] = np.minimum(pts[:, 0], self.domain.radius)
            half = 0.5 * self.domain.height
            pts[:, 1] = np.clip(pts[:, 1], -half, half)
            # nodes flush with the outer rim project to it
            rim = self.boundary[jj, ii] & (ii == self.n_r - 1)
            pts[rim, 0] = self.domain.radius
        self.boundary_points = pts

    # -- queries

    def boundary_distance(self, r: float, z: float) -> float:
        """Distance from an in-domain point to the domain boundary (analytic
        for Ball/Cylinder, nearest non-defined cell center for Mask)."""
        if isinstance(self.domain, Ball):
            return self.domain.radius - hypot(r, z)
        if isinstance(self.domain, Cylinder):
            return min(self.domain.radius - r, 0.5 * self.domain.height - abs(z))
        jj, ii = np.nonzero(~self.defined)
        if jj.size == 0:
            return min(self.r[-1] + 0.5 * self.dr - r,
                       self.z[-1] + 0.5 * self.dz - abs(z))
        d = np.hypot(self.r[ii] - r, self.z[jj] - z)
        return float(d.min())


def _any_neighbor(mask: np.ndarray) -> np.ndarray:
    """Cells with at least one True 4-neighbor."""
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def _shift(arr: np.ndarray, axis: int, step: int, fill=0):
    """Array shifted so that out[n] = arr[n + step] along axis, edge-filled."""
    out = np.full_like(arr, fill)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if step == 1:
        src[axis], dst[axis] = slice(1, None), slice(None, -1)
    else:
        src[axis], dst[axis] = slice(None, -1), slice(1, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


# --- deterministic reductions ------------------------------------------------

def _chunk_partials(flat: np.ndarray, op, threads: int) -> np.ndarray:
    n_chunks = max(1, ceil(flat.size / _CHUNK))
    pieces = [flat[k * _CHUNK:(k + 1) * _CHUNK] for k in range(n_chunks)]
    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(op, pieces))
    else:
        partials = [op(p) for p in pieces]
    return np.array(partials)


def reduce_sum(values: np.ndarray, threads: int = 1) -> float:
    """Sum over a fixed chunk partition; bitwise thread-count independent."""
    flat = np.ascontiguousarray(values, dtype=float).ravel()
    if flat.size == 0:
        return 0.0
    return float(np.sum(_chunk_partials(flat, np.sum, threads)))


def reduce_max(values: np.ndarray, threads: int = 1) -> float:
    flat = np.ascontiguousarray(values, dtype=float).ravel()
    if flat.size == 0:
        return 0.0
    return float(np.max(_chunk_partials(flat, np.max, threads)))


# --- fields ------------------------------------------------------------------

@dataclass
class EquivariantField:
    """Split-coordinate field values on a half-slice grid.

    ``values[j, i]`` is the 5-vector (f0, Re f1, Im f1, Re f2, Im f2) at node
    (z_j, r_i); entries outside ``grid.defined`` are zero and meaningless.
    """

    grid: HalfSliceGrid
    values: np.ndarray

    def __post_init__(self):
        expected = (self.grid.n_z, self.grid.n_r, 5)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != expected:
            raise InvalidSpec(
                f"field shape {self.values.shape} != grid shape {expected}")

    def copy(self) -> "EquivariantField":
        return EquivariantField(self.grid, self.values.copy())

    def norm_violation(self) -> float:
        """max over valued nodes of | |f| - 1 |."""
        norms = np.linalg.norm(self.values[self.grid.defined], axis=-1)
        if norms.size == 0:
            return 0.0
        return float(np.max(np.abs(norms - 1.0)))

    def normalize(self):
        """Rescale active nodes onto the unit sphere in place."""
        act = self.grid.active
        norms = np.linalg.norm(self.values[act], axis=-1, keepdims=True)
        self.values[act] = self.values[act] / np.maximum(norms, 1e-300)


def sample_field(grid: HalfSliceGrid,
                 fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> EquivariantField:
    """Field with values fn(r, z) -> (..., 5) at every valued node.

    Boundary nodes are sampled at their projected boundary points, active
    nodes at their centers.
    """
    values = np.zeros((grid.n_z, grid.n_r, 5))
    jj, ii = np.nonzero(grid.active)
    values[jj, ii] = fn(grid.r[ii], grid.z[jj])
    bp = grid.boundary_points
    if len(bp):
        vb = fn(bp[:, 0], bp[:, 1])
        values[grid.boundary_index[:, 0], grid.boundary_index[:, 1]] = vb
    return EquivariantField(grid, values)


def apply_trace(field: EquivariantField, trace) -> None:
    """Copy trace values onto the grid's boundary nodes in place."""
    if trace.grid is not field.grid:
        raise BadBoundary("trace was sampled on a different grid")
    idx = field.grid.boundary_index
    vals = np.asarray(trace.values, dtype=float)
    if vals.shape != (len(idx), 5):
        raise BadBoundary(
            f"trace carries {vals.shape} values for {len(idx)} boundary nodes")
    norms = np.linalg.norm(vals, axis=-1)
    if len(norms) and np.max(np.abs(norms - 1.0)) > 1e-10:
        raise BadBoundary("trace values are not unit norm")
    field.values[idx[:, 0], idx[:, 1]] = vals


# --- energy and gradient -----------------------------------------------------

def _require_unit(field: EquivariantField):
    bad = field.norm_violation()
    if bad > 1e-8:
        raise NormViolation(f"node off the unit sphere by {bad:.3e}")


def _density_terms(field: EquivariantField, lam: float, penalty_eps: float | None):
    """Per-node energy density (without the 2 pi w r dr dz measure)."""
    grid, v = field.grid, field.values
    act, dfn = grid.active, grid.defined

    gsq = np.zeros((grid.n_z, grid.n_r))
    for axis, h in ((0, grid.dz), (1, grid.dr)):
        for step in (1, -1):
            ok = _shift(dfn, axis, step, False) & act
            diff = _shift(v, axis, step) - v
            gsq += np.where(ok, np.einsum("jkc,jkc->jk", diff, diff), 0.0) / h ** 2

    az = (v[..., 1] ** 2 + v[..., 2] ** 2
          + 4.0 * (v[..., 3] ** 2 + v[..., 4] ** 2)) / (2.0 * grid.r[None, :] ** 2)

    dens = 0.25 * gsq + az
    if lam != 0.0 or penalty_eps is not None:
        t = v[..., 0]
        z1 = v[..., 1] + 1j * v[..., 2]
        z2 = v[..., 3] + 1j * v[..., 4]
        tr3 = cubic_invariant(t, z1, z2)
        if penalty_eps is None:
            w_pot = 1.0 / (3.0 * SQRT6) - tr3 / 3.0
            dens = dens + lam * w_pot
        else:
            nsq = np.einsum("jkc,jkc->jk", v, v)
            w_pot = nsq * nsq / (4.0 * SQRT6) - tr3 / 3.0 + 1.0 / (12.0 * SQRT6)
            dens = dens + lam * w_pot \
                + (1.0 - nsq) ** 2 / (4.0 * penalty_eps ** 2)
    return dens


def discrete_energy(field: EquivariantField, lam: float = 0.0,
                    penalty_eps: float | None = None, threads: int = 1,
                    _skip_norm_check: bool = False) -> float:
    """Reduced energy of the field (see module docstring for the formula).

    With ``penalty_eps`` unset the field must lie on the unit sphere at every
    valued node (hard mode); otherwise the Ginzburg-Landau penalty
    (1 - |f|^2)^2 / (4 eps^2) is added and any norm is accepted.
    """
    if lam < 0.0:
        raise InvalidSpec(f"lambda must be nonnegative, got {lam}")
    if penalty_eps is None and not _skip_norm_check:
        _require_unit(field)
    grid = field.grid
    dens = _density_terms(field, lam, penalty_eps)
    measure = grid.weight * grid.r[None, :] * (grid.dr * grid.dz)
    return TWO_PI * reduce_sum(np.where(grid.active, measure * dens, 0.0), threads)


def discrete_gradient(field: EquivariantField, lam: float = 0.0,
                      penalty_eps: float | None = None, project: bool = True,
                      _skip_norm_check: bool = False) -> np.ndarray:
    """Exact Euclidean gradient of ``discrete_energy`` w.r.t. active nodes.

    Returns an (n_z, n_r, 5) array, zero off the active set.  In hard mode
    (``penalty_eps`` unset) the potential is differentiated along the sphere's
    affine extension W = 1/(3 sqrt6) - tr(Q^3)/3, and with ``project`` the
    result is projected onto the tangent space of S^4 at each node, which is
    the gradient that drives constrained descent.
    """
    if lam < 0.0:
        raise InvalidSpec(f"lambda must be nonnegative, got {lam}")
    if penalty_eps is None and not _skip_norm_check:
        _require_unit(field)
    grid, v = field.grid, field.values
    act, dfn = grid.active, grid.defined
    cell = grid.dr * grid.dz
    wr = grid.weight * grid.r[None, :]

    g = np.zeros_like(v)
    for axis, h in ((0, grid.dz), (1, grid.dr)):
        for step in (1, -1):
            nb_def = _shift(dfn, axis, step, False) & act
            nb_act = _shift(act, axis, step, False) & act
            coef = np.where(nb_def, wr, 0.0) + np.where(nb_act, _shift(wr, axis, step), 0.0)
            diff = v - _shift(v, axis, step)
            g += (0.5 * cell / h ** 2) * coef[..., None] * \
                np.where(nb_def[..., None], diff, 0.0)

    az_scale = (grid.weight / grid.r[None, :]) * cell
    g[..., 1] += az_scale * v[..., 1]
    g[..., 2] += az_scale * v[..., 2]
    g[..., 3] += 4.0 * az_scale * v[..., 3]
    g[..., 4] += 4.0 * az_scale * v[..., 4]

    if lam != 0.0 or penalty_eps is not None:
        t = v[..., 0]
        z1 = v[..., 1] + 1j * v[..., 2]
        z2 = v[..., 3] + 1j * v[..., 4]
        dt, g1, g2 = cubic_invariant_gradient(t, z1, z2)
        tr3_grad = np.stack([dt, g1.real, g1.imag, g2.real, g2.imag], axis=-1)
        pot_grad = -tr3_grad / 3.0
        if penalty_eps is not None:
            nsq = np.einsum("jkc,jkc->jk", v, v)
            pot_grad = lam * (pot_grad + (nsq / SQRT6)[..., None] * v) \
                + ((nsq - 1.0) / penalty_eps ** 2)[..., None] * v
        else:
            pot_grad = lam * pot_grad
        g += (wr * cell)[..., None] * pot_grad

    g *= TWO_PI
    g[~act] = 0.0
    if project and penalty_eps is None:
        dots = np.einsum("jkc,jkc->jk", g, v)
        g = g - dots[..., None] * v
        g[~act] = 0.0
    return g


# --- solver configuration and runs -------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    """Descent parameters.

    ``penalty_eps = None`` selects the hard unit-norm mode (renormalize after
    every step); a positive value selects the Ginzburg-Landau penalty mode.
    ``tau = None`` selects the Armijo backtracking line search; a positive
    value takes that fixed step (and the run aborts with Diverged if the
    energy ever increases beyond roundoff slack).
    """

    lam: float = 0.0
    penalty_eps: float | None = None
    tau: float | None = None
    backtrack_c: float = 1e-4
    backtrack_shrink: float = 0.5
    max_iters: int = 20000
    grad_tol: float = 1e-6
    seed: int = 0
    init: str = "homogeneous"
    dipole_count: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.lam < 0.0:
            raise InvalidSpec(f"lambda must be nonnegative, got {self.lam}")
        if self.penalty_eps is not None and not self.penalty_eps > 0.0:
            raise InvalidSpec("penalty_eps must be positive")
        if self.tau is not None and not self.tau > 0.0:
            raise InvalidSpec("fixed step tau must be positive")
        if not 0.0 < self.backtrack_c < 1.0:
            raise InvalidSpec("backtrack_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_shrink < 1.0:
            raise InvalidSpec("backtrack_shrink must lie in (0, 1)")
        if self.max_iters < 1:
            raise InvalidSpec("max_iters must be at least 1")
        if not self.grad_tol > 0.0:
            raise InvalidSpec("grad_tol must be positive")
        if self.init not in ("homogeneous", "dipole", "provided"):
            raise InvalidSpec(f"unknown init {self.init!r}")
        if self.dipole_count < 1:
            raise InvalidSpec("dipole_count must be at least 1")
        if self.threads < 1:
            raise InvalidSpec("threads must be at least 1")


class Singularity(NamedTuple):
    z: float
    sign: int


@dataclass
class SolverRun:
    """Result of a descent: final field, histories, and provenance."""

    grid: HalfSliceGrid
    config: SolverConfig
    trace: object
    field: EquivariantField
    energy_history: np.ndarray
    grad_history: np.ndarray
    converged: bool
    iterations: int
    wall_time: float
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def energy(self) -> float:
        return float(self.energy_history[-1])


# --- initial fields ----------------------------------------------------------

def _homogeneous_extension(grid: HalfSliceGrid, trace) -> EquivariantField:
    """Boundary values carried inward, then renormalized.

    On a ball the trace is a function of the polar angle alone, so each
    active node takes the value linearly interpolated in angle; elsewhere it
    takes the value of the nearest boundary node.
    """
    field = EquivariantField(grid, np.zeros((grid.n_z, grid.n_r, 5)))
    apply_trace(field, trace)
    bvals = field.values[grid.boundary_index[:, 0], grid.boundary_index[:, 1]]
    jj, ii = np.nonzero(grid.active)

    if isinstance(grid.domain, Ball):
        th_b = np.arctan2(grid.boundary_points[:, 0], grid.boundary_points[:, 1])
        order = np.argsort(th_b, kind="stable")
        th_b, bv = th_b[order], bvals[order]
        th_n = np.arctan2(grid.r[ii], grid.z[jj])
        interp = np.column_stack([
            np.interp(th_n, th_b, bv[:, c]) for c in range(5)])
    else:
        bp = grid.boundary_points
        pts = np.column_stack([grid.r[ii], grid.z[jj]])
        nearest = np.empty(len(pts), dtype=int)
        for start in range(0, len(pts), 2048):
            blk = pts[start:start + 2048]
            d2 = (blk[:, None, 0] - bp[None, :, 0]) ** 2 \
                + (blk[:, None, 1] - bp[None, :, 1]) ** 2
            nearest[start:start + 2048] = np.argmin(d2, axis=1)
        interp = bvals[nearest]

    norms = np.linalg.norm(interp, axis=-1, keepdims=True)
    small = norms[:, 0] < 1e-6
    interp[small] = E0_COORDS
    norms[small] = 1.0
    field.values[jj, ii] = interp / norms
    return field


def _dipole_seed(grid: HalfSliceGrid, trace, count: int,
                 rng: np.random.Generator) -> EquivariantField:
    """Homogeneous extension overlaid near the axis with ``count`` pairs of
    opposite axis defects (f0 flips sign across each seeded charge).

    The stack of pairs is anchored at the z-coordinate of the boundary
    point where the trace comes closest to -e0: a grafted -e0 axis segment
    is cheapest next to the boundary region that already leans that way, so
    seeds planted there survive relaxation instead of annihilating, which is
    what makes the seed select the split-candidate basin.  Positions get a
    small seeded jitter so distinct seeds explore slightly different basins.
    """
    field = _homogeneous_extension(grid, trace)
    axis_rows = np.flatnonzero(grid.defined[:, 0] & grid.defined[:, 1])
    if axis_rows.size < 4 * count + 4:
        raise InvalidSpec("axis too short for the requested dipole count")
    z_a, z_b = grid.z[axis_rows[0]], grid.z[axis_rows[-1]]
    span = z_b - z_a

    gap = 0.25 * span / (count + 1)
    width = max(2.0 * grid.dz, 0.25 * gap)
    anchor = float(grid.boundary_points[int(np.argmin(trace.values[:, 0])), 1])
    lo = z_a + 2.0 * grid.dz + 0.5 * gap + width
    hi = z_b - 2.0 * grid.dz - 0.5 * gap - width - 2.0 * gap * (count - 1)
    base = float(np.clip(anchor, lo, max(hi, lo)))

    charges = []
    for k in range(count):
        center = base + 2.0 * gap * k
        for off in (-0.5 * gap, 0.5 * gap):
            charges.append(center + off + rng.normal(0.0, 0.02 * gap))

    zz = grid.z[:, None] * np.ones((1, grid.n_r))
    f0 = np.ones_like(zz)
    for zq in charges:
        f0 *= np.tanh((zz - zq) / width)
    f0 = np.clip(f0, -1.0, 1.0)
    model = np.zeros((grid.n_z, grid.n_r, 5))
    model[..., 0] = f0
    model[..., 1] = np.sqrt(np.maximum(1.0 - f0 ** 2, 0.0))

    r_span = grid.r[np.nonzero(grid.active)[1]].max()
    chi = np.clip(grid.r[None, :] / (0.35 * r_span), 0.0, 1.0)
    blend = (1.0 - chi[..., None]) * model + chi[..., None] * field.values
    norms = np.linalg.norm(blend, axis=-1, keepdims=True)
    ok = norms[..., 0] > 0.2
    act = grid.active
    use = act & ok
    field.values[use] = blend[use] / norms[use]
    return field


# --- descent -----------------------------------------------------------------

def minimize(grid: HalfSliceGrid, trace, config: SolverConfig,
             init_field: EquivariantField | None = None) -> SolverRun:
    """Projected gradient descent from the configured initial field.

    The descent direction is the Euclidean gradient divided by each node's
    measure 2 pi w r dr dz (the discrete L^2 mass), which makes the stable
    step size resolution-uniform; the reported gradient norm is the max over
    active nodes of the Euclidean length of that scaled (and, in hard mode,
    tangentially projected) gradient.  Convergence means this norm stays at
    or below ``grad_tol`` for 10 consecutive iterations.

    The backtracking search starts each iteration from a Barzilai-Borwein
    proposal (secant curvature of the last accepted step, clipped to a safe
    range around the base step 0.1 dr^2) and shrinks until the Armijo test
    holds; acceptance carries a machine-precision slack so the search cannot
    stall when the attainable decrease falls below roundoff.  Every accepted
    step therefore satisfies E_new <= E + 1e-13 max(1, |E|).
    """
    t_start = time.perf_counter()
    rng = np.random.default_rng(config.seed)

    if config.init == "provided":
        if init_field is None:
            raise InvalidSpec("init='provided' needs an init_field")
        if init_field.grid is not grid:
            raise BadBoundary("provided field lives on a different grid")
        f = init_field.copy()
        apply_trace(f, trace)
        if config.penalty_eps is None:
            f.normalize()
    elif config.init == "dipole":
        f = _dipole_seed(grid, trace, config.dipole_count, rng)
    else:
        f = _homogeneous_extension(grid, trace)

    lam, eps, threads = config.lam, config.penalty_eps, config.threads
    act = grid.active
    mass = TWO_PI * grid.weight * grid.r[None, :] * (grid.dr * grid.dz)
    minv = np.where(act, 1.0 / np.maximum(mass, 1e-300), 0.0)

    def energy(fld):
        return discrete_energy(fld, lam, eps, threads, _skip_norm_check=True)

    def retract(vals_new):
        out = EquivariantField(grid, vals_new)
        if eps is None:
            out.normalize()
        return out

    tau0 = 0.1 * grid.dr ** 2
    tau = config.tau if config.tau is not None else tau0
    tau_lo, tau_hi = 1e-3 * tau0, 1e3 * tau0
    e_now = energy(f)
    energies = [e_now]
    gnorms = []
    streak = 0
    converged = False
    backtracks = 0
    iterations = 0
    prev_vals = None
    prev_g = None

    for it in range(config.max_iters):
        g = discrete_gradient(f, lam, eps, project=True, _skip_norm_check=True)
        d = g * minv[..., None]
        node_norm = np.where(act, np.sqrt(np.einsum("jkc,jkc->jk", d, d)), 0.0)
        gmax = reduce_max(node_norm, threads)
        gnorms.append(gmax)

        streak = streak + 1 if gmax <= config.grad_tol else 0
        if streak >= 10:
            converged = True
            iterations = it
            break

        gd = reduce_sum(np.einsum("jkc,jkc->jk", g, d), threads)
        if not np.isfinite(gd) or not np.isfinite(e_now):
            raise Diverged("energy or gradient became non-finite")
        slack = 1e-13 * max(1.0, abs(e_now))

        if config.tau is not None:
            f_new = retract(f.values - config.tau * d)
            e_new = energy(f_new)
            if not e_new <= e_now + 1e-12 * max(1.0, abs(e_now)):
                raise Diverged(
                    f"fixed step tau={config.tau} increased the energy")
        else:
            if prev_vals is not None:
                # secant (Barzilai-Borwein) curvature of the last step in the
                # mass metric: tau = <s, s>_m / <s, y> with y the raw
                # gradient increment, clipped to a safe window
                s = f.values - prev_vals
                y = g - prev_g
                ss = reduce_sum(mass[..., None] * s * s, threads)
                sy = reduce_sum(s * y, threads)
                if np.isfinite(sy) and sy > 0.0:
                    tau = min(max(ss / sy, tau_lo), tau_hi)
            prev_vals = f.values.copy()
            prev_g = g

            t_step = tau
            while True:
                f_new = retract(f.values - t_step * d)
                e_new = energy(f_new)
                if e_new <= e_now - config.backtrack_c * t_step * gd + slack:
                    break
                t_step *= config.backtrack_shrink
                backtracks += 1
                if t_step < 1e-10 * tau0:
                    raise Diverged("line search collapsed")
            tau = t_step

        f = f_new
        e_now = e_new
        energies.append(e_now)
        iterations = it + 1

    return SolverRun(
        grid=grid,
        config=config,
        trace=trace,
        field=f,
        energy_history=np.array(energies),
        grad_history=np.array(gnorms),
        converged=converged,
        iterations=iterations,
        wall_time=time.perf_counter() - t_start,
        diagnostics={"backtracks": backtracks, "final_tau": tau},
    )


# --- diagnostics -------------------------------------------------------------

def axis_profile(run: SolverRun) -> tuple[np.ndarray, np.ndarray]:
    """(z, f0) along the axis, linearly extrapolated from the first two node
    columns: f0(0, z_j) ~ 1.5 f0[j, 0] - 0.5 f0[j, 1]."""
    grid = run.grid
    rows = np.flatnonzero(run.grid.defined[:, 0] & run.grid.defined[:, 1])
    if rows.size == 0:
        raise InvalidSpec("grid has no axis column")
    v = run.field.values
    f0 = 1.5 * v[rows, 0, 0] - 0.5 * v[rows, 1, 0]
    return grid.z[rows], f0


def detect_singularities(run: SolverRun) -> list[Singularity]:
    """Axis points where the extrapolated f0 changes sign with |f0| > 0.5 on
    both flanks; sign +1 when f0 goes from -1-ish below to +1-ish above.

    Requires a converged run.
    """
    if not run.converged:
        raise Unconverged("singularity scan needs a converged run")
    z, f0 = axis_profile(run)

    crossings = [k for k in range(len(f0) - 1) if f0[k] * f0[k + 1] < 0.0]
    out = []
    for n, k in enumerate(crossings):
        lo = crossings[n - 1] + 1 if n > 0 else 0
        hi = crossings[n + 1] if n + 1 < len(crossings) else len(f0) - 1
        left_ok = np.max(np.abs(f0[lo:k + 1])) > 0.5
        right_ok = np.max(np.abs(f0[k + 1:hi + 1])) > 0.5
        if not (left_ok and right_ok):
            continue
        zc = z[k] + (z[k + 1] - z[k]) * f0[k] / (f0[k] - f0[k + 1])
        sign = 1 if f0[k] < 0.0 else -1
        out.append(Singularity(float(zc), sign))
    return out


@dataclass(frozen=True)
class TangentFit:
    """Best local tangent-map model s * (cos t', e^{i alpha} sin t', 0)."""

    alpha: float
    sign: int
    residuals: tuple

    def residual(self, rho: float) -> float:
        for r, res in self.residuals:
            if abs(r - rho) < 1e-12:
                return res
        raise KeyError(f"no residual recorded at radius {rho}")


def fit_tangent_map(run: SolverRun, singularity, radii) -> TangentFit:
    """Least-squares fit of a tangent map to the field on annuli around an
    axis singularity.

    At distance rho from the singularity the model is
    s * (cos theta', e^{i alpha} sin theta', 0) with theta' the polar angle
    seen from the singular point.  The phase and sign are fit jointly over
    all annuli; the per-annulus RMS misfits come back with the result.
    """
    z_s = singularity.z if hasattr(singularity, "z") else float(singularity[0])
    radii = [float(x) for x in radii]
    if not radii or min(radii) <= 0.0:
        raise InvalidSpec("fit radii must be positive")
    grid = run.grid
    h = max(grid.dr, grid.dz)

    margin = grid.boundary_distance(0.0, z_s)
    if max(radii) + 4.0 * h > margin:
        raise TooCloseToBoundary(
            f"fit radius {max(radii)} + isolation 4h exceeds the distance "
            f"{margin:.4g} to the boundary")
    for other in detect_singularities(run):
        if abs(other.z - z_s) > 1e-9 and abs(other.z - z_s) < max(radii) + 4.0 * h:
            raise TooCloseToBoundary(
                f"another singularity at z={other.z:.4g} intrudes on the fit region")

    jj, ii = np.nonzero(grid.active)
    rr, zz = grid.r[ii], grid.z[jj]
    dist = np.hypot(rr, zz - z_s)
    theta = np.arctan2(rr, zz - z_s)
    vals = run.field.values[jj, ii]

    sels = []
    for rho in radii:
        sel = np.abs(dist - rho) <= h
        if np.count_nonzero(sel) < 8:
            raise InvalidSpec(f"annulus at radius {rho} captures too few nodes")
        sels.append(sel)

    best = None
    for sign in (1, -1):
        pooled = np.concatenate([
            (vals[s, 1] + 1j * vals[s, 2]) * np.sin(theta[s]) for s in sels])
        c = np.sum(pooled) * sign
        alpha = float(np.angle(c)) if abs(c) > 0.0 else 0.0
        total = 0.0
        residuals = []
        for rho, s in zip(radii, sels):
            model = np.zeros((np.count_nonzero(s), 5))
            model[:, 0] = np.cos(theta[s])
            model[:, 1] = np.cos(alpha) * np.sin(theta[s])
            model[:, 2] = np.sin(alpha) * np.sin(theta[s])
            diff = vals[s] - sign * model
            sq = float(np.mean(np.sum(diff * diff, axis=-1)))
            residuals.append((rho, sqrt(sq)))
            total += sq
        if best is None or total < best[0]:
            best = (total, sign, alpha, tuple(residuals))

    _, sign, alpha, residuals = best
    return TangentFit(alpha=alpha, sign=sign, residuals=residuals)


def monotonicity_profile(run: SolverRun, x0: float, radii) -> list[tuple[float, float]]:
    """Scaled ball energies [(rho, E(B_rho(x0 e_z)) / rho)] for a run.

    The ball energy sums each active node's full density (gradient, angular,
    potential/penalty terms as configured for the run) against the area of
    the cell clipped to the half-disc r^2 + (z - x0)^2 <= rho^2, so the
    largest radius reproduces the run's total energy when the ball fills the
    domain.
    """
    grid = run.grid
    radii = [float(x) for x in radii]
    if not radii or min(radii) <= 0.0:
        raise InvalidSpec("profile radii must be positive")
    inside_margin = grid.boundary_distance(0.0, x0)
    if max(radii) > inside_margin + 1e-12:
        raise BallOutsideDomain(
            f"ball of radius {max(radii)} at z={x0} leaves the domain "
            f"(boundary distance {inside_margin:.4g})")

    dens = _density_terms(run.field, run.config.lam, run.config.penalty_eps)
    e_area = np.where(grid.active, TWO_PI * grid.r[None, :] * dens, 0.0)

    half_r, half_z = 0.5 * grid.dr, 0.5 * grid.dz
    cell = grid.dr * grid.dz
    jj, ii = np.nonzero(grid.active)
    out = []
    for rho in radii:
        total = 0.0
        near = np.hypot(grid.r[ii], grid.z[jj] - x0) <= rho + hypot(half_r, half_z)
        for j, i in zip(jj[near], ii[near]):
            r_c, z_c = grid.r[i], grid.z[j] - x0
            far = hypot(abs(r_c) + half_r, abs(z_c) + half_z)
            if far <= rho:
                frac = 1.0
            else:
                frac = _disc_rect_area(rho, r_c - half_r, r_c + half_r,
                                       z_c - half_z, z_c + half_z) / cell
                if frac <= 0.0:
                    continue
            total += e_area[j, i] * min(grid.weight[j, i], frac) * cell
        out.append((rho, total / rho))
    return out


# --- artifact round trip -----------------------------------------------------

CSV_HEADER = "r,z,f0,f1re,f1im,f2re,f2im"


def field_to_csv(field: EquivariantField) -> str:
    """CSV dump of all valued nodes, z-outer row-major, floats via repr."""
    grid = field.grid
    lines = [CSV_HEADER]
    for j in range(grid.n_z):
        for i in np.flatnonzero(grid.defined[j]):
            v = field.values[j, i]
            lines.append(",".join(
                repr(float(x)) for x in
                (grid.r[i], grid.z[j], v[0], v[1], v[2], v[3], v[4])))
    return "\n".join(lines) + "\n"


def field_from_csv(text: str, grid: HalfSliceGrid) -> EquivariantField:
    """Rebuild a field from ``field_to_csv`` output on a matching grid."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise InvalidSpec("field CSV is missing the expected header")
    values = np.zeros((grid.n_z, grid.n_r, 5))
    seen = np.zeros((grid.n_z, grid.n_r), dtype=bool)
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 7:
            raise InvalidSpec(f"malformed field CSV row: {ln!r}")
        r, z = float(parts[0]), float(parts[1])
        i = int(round(r / grid.dr - 0.5))
        j = int(round((z - grid.z_lo) / grid.dz - 0.5))
        if not (0 <= i < grid.n_r and 0 <= j < grid.n_z):
            raise InvalidSpec(f"field CSV row outside the grid: {ln!r}")
        if abs(grid.r[i] - r) > 1e-9 * max(1.0, abs(r)) \
                or abs(grid.z[j] - z) > 1e-9 * max(1.0, abs(z)):
            raise InvalidSpec(f"field CSV row off the node lattice: {ln!r}")
        values[j, i] = [float(x) for x in parts[2:]]
        seen[j, i] = True
    if not np.array_equal(seen, grid.defined):
        raise InvalidSpec("field CSV does not cover exactly the valued nodes")
    return EquivariantField(grid, values)
