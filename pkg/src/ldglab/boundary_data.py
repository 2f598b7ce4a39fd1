"""Boundary traces for the half-slice solver.

An equivariant unit field on a ball restricts on the boundary sphere to a
latitude profile (f0(theta), f1(theta), f2(theta)); this module samples such
profiles onto the boundary nodes of a :class:`~ldglab.solver.HalfSliceGrid`
and tags them with the topological data the analysis stage consumes.

Three generators are provided:

* ``director_trace``  - uniaxial data from an angle function h(theta): the
  director (cos phi sin h, sin phi sin h, cos h) lifted to its Q-tensor.
  Angle functions cover the identity-like h = theta, the constant h = 0, and
  a squeeze family h_j that collapses the nonconstant part of the trace into
  a shrinking band around the equator as j grows;
* ``full_sphere_trace`` - restriction of a linearly full harmonic sphere,
  the natural boundary data for probing smooth (orientable) minimizers;
* ``tangent_trace``   - restriction of a degree-one tangent map, pinning
  opposite uniaxial states at the two poles so an axis defect is forced.

All traces are unit norm to 1e-12 by construction and record their values at
the exact poles, where f1 and f2 must vanish and f0 must be +-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sin, sqrt

import numpy as np

from .errors import BadBoundary, BadEndpoints, InvalidSpec
from .solver import Ball, HalfSliceGrid
from .spheres import SphereSpec, profile_batch
from .tensor_core import SQRT6, cubic_invariant

SQRT3 = sqrt(3.0)

E0_PROFILE = np.array([1.0, 0.0, 0.0, 0.0, 0.0])


# --- the trace container -----------------------------------------------------

@dataclass(frozen=True)
class BoundaryTrace:
    """Sampled boundary values plus generator provenance.

    ``values[k]`` is the split 5-vector at ``grid.boundary_points[k]``;
    ``poles`` holds the analytic profile values at theta = 0 and pi.
    ``degree`` is the equator-winding degree of the underlying director when
    one exists (None otherwise); ``hp1`` records whether the trace stays
    strictly away from the negative uniaxial cone (min biaxiality > -1).
    """

    grid: HalfSliceGrid
    values: np.ndarray
    tag: str
    params: dict
    poles: tuple
    degree: int | None
    hp1: bool

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.grid.boundary_index), 5):
            raise BadBoundary(
                f"trace shape {vals.shape} does not cover the grid's "
                f"{len(self.grid.boundary_index)} boundary nodes")
        norms = np.linalg.norm(vals, axis=-1)
        if len(norms) and np.max(np.abs(norms - 1.0)) > 1e-12:
            raise BadBoundary(
                f"trace off the unit sphere by {np.max(np.abs(norms - 1.0)):.3e}")
        for f in self.poles:
            f = np.asarray(f, dtype=float)
            if abs(abs(f[0]) - 1.0) > 1e-10 or np.max(np.abs(f[1:])) > 1e-10:
                raise BadBoundary(f"pole value {f} is not a uniaxial axis state")
        object.__setattr__(self, "values", vals)


def _profile_hp1(profile, n: int = 2048) -> bool:
    """min over latitudes of the signed biaxiality, compared against -1."""
    thetas = np.linspace(0.0, pi, n)
    f = profile(thetas)
    t, z1, z2 = f[:, 0], f[:, 1] + 1j * f[:, 2], f[:, 3] + 1j * f[:, 4]
    beta = SQRT6 * cubic_invariant(t, z1, z2)
    return bool(np.min(beta) > -1.0 + 1e-12)


def _make_trace(grid: HalfSliceGrid, profile, tag: str, params: dict,
                degree: int | None) -> BoundaryTrace:
    """Sample a latitude profile onto the grid's boundary nodes."""
    if not isinstance(grid.domain, Ball):
        raise InvalidSpec(f"{tag} traces live on balls, not {grid.domain!r}")
    bp = grid.boundary_points
    thetas = np.arctan2(bp[:, 0], bp[:, 1])
    vals = profile(thetas)
    norms = np.linalg.norm(vals, axis=-1, keepdims=True)
    vals = vals / np.maximum(norms, 1e-300)
    poles = (profile(np.array([0.0]))[0], profile(np.array([pi]))[0])
    return BoundaryTrace(grid=grid, values=vals, tag=tag, params=params,
                         poles=poles, degree=degree, hp1=_profile_hp1(profile))


def constant_trace(grid: HalfSliceGrid, coords=E0_PROFILE) -> BoundaryTrace:
    """Constant boundary data (any domain); default is the uniaxial e0 state."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (5,):
        raise InvalidSpec("constant trace needs a split 5-vector")
    n = np.linalg.norm(coords)
    if abs(n - 1.0) > 1e-12:
        raise BadBoundary(f"constant trace must be unit norm, |c| = {n}")
    vals = np.tile(coords, (len(grid.boundary_index), 1))
    return BoundaryTrace(grid=grid, values=vals, tag="constant",
                         params={"coords": [float(c) for c in coords]},
                         poles=(coords, coords), degree=None,
                         hp1=bool(SQRT6 * cubic_invariant(
                             coords[0], complex(coords[1], coords[2]),
                             complex(coords[3], coords[4])) > -1.0 + 1e-12))


# --- angle functions ---------------------------------------------------------

def _smoothstep5(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def base_angle(thetas) -> np.ndarray:
    """The reference monotone angle profile h-bar: identically 0 up to
    pi/6, identically pi from 5 pi/6, a C^2 quintic ramp between, odd
    about the equator (h(pi - t) = pi - h(t))."""
    thetas = np.asarray(thetas, dtype=float)
    return pi * _smoothstep5((thetas - pi / 6.0) / (2.0 * pi / 3.0))


def angle_radial():
    """h(theta) = theta: the outward director."""
    return lambda thetas: np.asarray(thetas, dtype=float)


def angle_constant(value: float = 0.0):
    """Constant angle function (endpoint-valid only for 0 or pi)."""
    return lambda thetas: np.full_like(np.asarray(thetas, dtype=float), value)


def _squeeze_circle(thetas: np.ndarray, rho: float) -> np.ndarray:
    """Angle coordinate after the boundary squeeze.

    The boundary of the meridian disc is the unit circle in the (x1, x3)
    slice plane; colatitude theta sits at w = sin(theta) + i cos(theta).  The
    disc automorphism  Phi_rho(w) = (w - 1 + 1/rho) / (1 - (1 - 1/rho) w)
    fixes +-1 and pushes everything else toward w = -1, so precomposing an
    angle profile with it concentrates its ramp near the equator point w = 1.
    The image is returned as an angle in (-pi/2, 3 pi/2), the slit circle
    avoiding (-1, 0).
    """
    w = np.sin(thetas) + 1j * np.cos(thetas)
    a = 1.0 - 1.0 / rho
    img = (w - a) / (1.0 - a * w)
    alpha = np.arctan2(img.real, img.imag)
    return np.where(alpha < -pi / 2.0, alpha + 2.0 * pi, alpha)


def angle_torus(j: float):
    """Squeeze family h_j = h-bar composed with the j-fold boundary squeeze;
    extended by the constants 0 and pi on the arcs beyond the poles."""
    if not j >= 1.0:
        raise InvalidSpec(f"squeeze parameter must be >= 1, got {j}")

    def h(thetas):
        alpha = _squeeze_circle(np.asarray(thetas, dtype=float), float(j))
        return np.where(alpha <= 0.0, 0.0,
                        np.where(alpha >= pi, pi, base_angle(alpha)))

    return h


# --- generators --------------------------------------------------------------

def _director_profile(h):
    def profile(thetas):
        hv = h(np.asarray(thetas, dtype=float))
        s, c = np.sin(hv), np.cos(hv)
        out = np.empty(hv.shape + (5,))
        out[..., 0] = 0.5 * (3.0 * c * c - 1.0)
        out[..., 1] = SQRT3 * s * c
        out[..., 2] = 0.0
        out[..., 3] = 0.5 * SQRT3 * s * s
        out[..., 4] = 0.0
        return out
    return profile


def director_trace(grid: HalfSliceGrid, h, tag: str = "director",
                   params: dict | None = None) -> BoundaryTrace:
    """Trace of the uniaxial field along the director with angle function h.

    In the slice plane (phi = 0) the split profile is

        ( (3 cos^2 h - 1)/2,  sqrt3 sin h cos h,  (sqrt3/2) sin^2 h ),

    which is automatically unit norm and has biaxiality identically +1.  The
    endpoints h(0), h(pi) must land in {0, pi} (else BadEndpoints) and the
    recorded degree is (cos h(0) - cos h(pi)) / 2.
    """
    ends = h(np.array([0.0, pi]))
    snapped = []
    for e in ends:
        if abs(e) <= 1e-9:
            snapped.append(0.0)
        elif abs(e - pi) <= 1e-9:
            snapped.append(pi)
        else:
            raise BadEndpoints(
                f"angle function ends at {tuple(float(x) for x in ends)}, "
                "need values in {0, pi}")
    degree = int(round((cos(snapped[0]) - cos(snapped[1])) / 2.0))
    return _make_trace(grid, _director_profile(h), tag,
                       dict(params or {}), degree)


def full_sphere_trace(grid: HalfSliceGrid, mu1, mu2) -> BoundaryTrace:
    """Trace of the linearly full harmonic sphere with parameters (mu1, mu2).

    Both poles map to the e0 state, so the trace is topologically trivial on
    the axis; for small |mu2| it approaches the degree-one tangent-map trace
    away from the poles instead, forcing the competition the split-minimizer
    scenario probes.
    """
    if abs(complex(mu1)) == 0.0 and abs(complex(mu2)) == 0.0:
        raise InvalidSpec("full sphere trace needs (mu1, mu2) != (0, 0)")
    spec = SphereSpec.full(mu1, mu2)

    def profile(thetas):
        p0, p1, p2 = profile_batch(spec, np.asarray(thetas, dtype=float))
        out = np.empty(np.shape(p0) + (5,))
        out[..., 0] = p0
        out[..., 1] = p1.real
        out[..., 2] = p1.imag
        out[..., 3] = p2.real
        out[..., 4] = p2.imag
        return out

    params = {"mu1re": float(np.real(mu1)), "mu1im": float(np.imag(mu1)),
              "mu2re": float(np.real(mu2)), "mu2im": float(np.imag(mu2))}
    return _make_trace(grid, profile, "full_sphere", params, degree=None)


def tangent_trace(grid: HalfSliceGrid, alpha: float = 0.0) -> BoundaryTrace:
    """Trace of the degree-one tangent map with phase alpha:
    (cos theta, e^{i alpha} sin theta, 0)."""

    def profile(thetas):
        thetas = np.asarray(thetas, dtype=float)
        out = np.empty(thetas.shape + (5,))
        out[..., 0] = np.cos(thetas)
        out[..., 1] = cos(alpha) * np.sin(thetas)
        out[..., 2] = sin(alpha) * np.sin(thetas)
        out[..., 3] = 0.0
        out[..., 4] = 0.0
        return out

    return _make_trace(grid, profile, "tangent", {"alpha": float(alpha)},
                       degree=1)
