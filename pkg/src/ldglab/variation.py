"""Tangent maps, the constant-norm hedgehog, and second-variation tests.

The unit-norm critical points of the Dirichlet energy that blow up from the
boundary-value problems studied here are 0-homogeneous: Q(x) = w(x/|x|) for an
equivariant harmonic sphere w.  This module evaluates the two relevant bases
(the equator-map family Q^(alpha) and the hedgehog), and quadratures the
second variation

    d2E(w)[X] = int |grad X_T|^2 - |grad w|^2 |X_T|^2,   X_T = X - (w.X) w,

over compactly supported equivariant test fields X.  The azimuthal direction
is never discretized: every quadratic integrand is phi-independent thanks to
the degree-(0, 1, 2) structure, so integrals reduce to (r, theta) quadratures
times 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, hypot, pi, sqrt

import numpy as np

from .errors import InvalidSpec, OriginEvaluation, QuadratureUnderResolved, SupportOverflow
from .spheres import SphereSpec, profile_batch
from .tensor_core import QTensor, SplitPoint, join_iota, uniaxial_from_director

SQRT3 = sqrt(3.0)


# --- bases -------------------------------------------------------------------

@dataclass(frozen=True)
class TangentMap:
    """The family sign * Q^(alpha): equator maps rotated by alpha."""

    alpha: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidSpec("sign must be +1 or -1")


@dataclass(frozen=True)
class Hedgehog:
    """Marker for the constant-norm hedgehog base."""


def _spherical(x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise OriginEvaluation("0-homogeneous fields have no value at the origin")
    return x / r, atan2(hypot(x[0], x[1]), x[2]), atan2(x[1], x[0])


def eval_tangent(tm: TangentMap, x) -> QTensor:
    """Evaluate sign * Q^(alpha) at x != 0 (0-homogeneous)."""
    _, theta, phi = _spherical(x)
    zeta1 = complex(np.sin(theta) * np.exp(1j * (phi + tm.alpha)))
    return QTensor(tm.sign * join_iota(SplitPoint(np.cos(theta), zeta1, 0.0)).a)


def eval_hedgehog(x) -> QTensor:
    """Constant-norm hedgehog: the uniaxial tensor along the radial director."""
    n, _, _ = _spherical(x)
    return uniaxial_from_director(n)


def _base_profile(base, thetas):
    """Split-form values, theta-derivatives and |grad_T w|^2 of a base on S^2.

    Returns (w, dw, dens): w and dw of shape (n, 5), dens a constant scalar
    (both bases have constant energy density on the sphere).
    """
    thetas = np.asarray(thetas, dtype=float)
    s, c = np.sin(thetas), np.cos(thetas)
    w = np.zeros(thetas.shape + (5,))
    dw = np.zeros_like(w)
    if isinstance(base, TangentMap):
        ca, sa = np.cos(base.alpha), np.sin(base.alpha)
        w[..., 0] = c
        w[..., 1] = ca * s
        w[..., 2] = sa * s
        dw[..., 0] = -s
        dw[..., 1] = ca * c
        dw[..., 2] = sa * c
        if base.sign < 0:
            w, dw = -w, -dw
        return w, dw, 2.0
    if isinstance(base, Hedgehog):
        w[..., 0] = 1.0 - 1.5 * s * s
        w[..., 1] = SQRT3 * s * c
        w[..., 3] = SQRT3 / 2.0 * s * s
        dw[..., 0] = -3.0 * s * c
        dw[..., 1] = SQRT3 * (c * c - s * s)
        dw[..., 3] = SQRT3 * s * c
        return w, dw, 6.0
    raise InvalidSpec(f"unknown base {base!r}")


# --- quadrature grid and test fields ----------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Trapezoid nodes in r on [0, r_max], Gauss-Legendre nodes in theta."""

    n_r: int = 256
    n_theta: int = 128
    r_max: float = 1.0

    def nodes(self):
        r = np.linspace(0.0, self.r_max, self.n_r)
        wr = np.full(self.n_r, r[1] - r[0])
        wr[0] *= 0.5
        wr[-1] *= 0.5
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        theta = 0.5 * pi * (x + 1.0)
        wth = 0.5 * pi * w
        return r, wr, theta, wth


@dataclass(frozen=True)
class TestField:
    """Equivariant test field sampled with its analytic first derivatives.

    values[i, j] holds the split components (x0, Re x1, Im x1, Re x2, Im x2)
    at (r_i, theta_j); the azimuthal behaviour is carried by the degree labels
    (0, 1, 2), never sampled.
    """

    __test__ = False  # not a test case despite the name

    grid: QuadratureGrid
    values: np.ndarray
    d_r: np.ndarray
    d_theta: np.ndarray
    rho: float
    compact: bool = True

    def __post_init__(self):
        shape = (self.grid.n_r, self.grid.n_theta, 5)
        for arr in (self.values, self.d_r, self.d_theta):
            if arr.shape != shape:
                raise InvalidSpec(f"field arrays must have shape {shape}")
        if self.compact:
            r = self.grid.nodes()[0]
            outside = r > self.rho
            if np.any(np.abs(self.values[outside]) > 1e-14):
                raise InvalidSpec("field does not vanish outside its support radius")

    @classmethod
    def from_callables(cls, grid: QuadratureGrid, value_fn, d_r_fn, d_theta_fn,
                       rho: float) -> "TestField":
        r, _, theta, _ = grid.nodes()
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        return cls(grid, value_fn(rr, tt), d_r_fn(rr, tt), d_theta_fn(rr, tt), rho)

    def norm_sq(self) -> float:
        """L^2(B) norm squared of the field, azimuthal factor included."""
        r, wr, theta, wth = self.grid.nodes()
        dens = np.sum(self.values**2, axis=-1)
        return 2.0 * pi * float(
            (wr * r**2) @ dens @ (wth * np.sin(theta)))


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return 3.0 * t * t - 2.0 * t**3


def _smoothstep_d(t):
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 6.0 * t - 6.0 * t * t, 0.0)


def _window(r, lo, lo_width, hi, hi_width):
    """C^1 plateau window: 0 below lo, 1 on [lo+lo_width, hi-hi_width], 0 above hi."""
    tu = (r - lo) / lo_width
    td = (hi - r) / hi_width
    w = _smoothstep(tu) * _smoothstep(td)
    dw = (_smoothstep_d(tu) / lo_width * _smoothstep(td)
          - _smoothstep(tu) * _smoothstep_d(td) / hi_width)
    return w, dw


def hedgehog_destabilizer(n_r: int = 128, n_theta: int = 96) -> TestField:
    """The test field (0, phi(r) g(theta) i e^{i phi}, 0) destabilizing the hedgehog.

    g is the second component of the hedgehog's sphere profile, g(theta) =
    (sqrt(3)/2) sin^2(theta).  The radial profile phi(r) = r^{-1/2}, windowed
    to [0.03, 0.9] by C^1 cubic ramps of widths 0.12 and 0.45, approximates
    the extremal of the sharp Hardy inequality int phi'^2 r^2 >= 1/4 int
    phi^2 on which the instability argument rests; the wide outer ramp keeps
    the cutoff cost below the margin.  The field is pointwise orthogonal to
    the base: the base's zeta_1 is real while X's is purely imaginary.
    """
    if n_r < 32 or n_theta < 32:
        raise ValueError("resolutions below 32 under-resolve the profile")
    grid = QuadratureGrid(n_r, n_theta, 1.0)

    def parts(rr, tt):
        w, dw = _window(rr, 0.03, 0.12, 0.9, 0.45)
        sqr = np.sqrt(np.maximum(rr, 1e-300))
        phi = w / sqr
        dphi = dw / sqr - w / (2.0 * rr * sqr + 1e-300)
        g = SQRT3 / 2.0 * np.sin(tt) ** 2
        dg = SQRT3 * np.sin(tt) * np.cos(tt)
        return phi, dphi, g, dg

    def value_fn(rr, tt):
        phi, _, g, _ = parts(rr, tt)
        out = np.zeros(rr.shape + (5,))
        out[..., 2] = phi * g
        return out

    def d_r_fn(rr, tt):
        _, dphi, g, _ = parts(rr, tt)
        out = np.zeros(rr.shape + (5,))
        out[..., 2] = dphi * g
        return out

    def d_theta_fn(rr, tt):
        phi, _, _, dg = parts(rr, tt)
        out = np.zeros(rr.shape + (5,))
        out[..., 2] = phi * dg
        return out

    return TestField.from_callables(grid, value_fn, d_r_fn, d_theta_fn, rho=0.9)


def random_test_field(grid: QuadratureGrid, rng, lo: float = 0.08,
                      hi: float = 0.85) -> TestField:
    """Random smooth compactly supported equivariant field.

    Shared C^1 radial window times a low-order polynomial; angular parts are
    low-order polynomials in cos(theta) with the sin^k(theta) factors that
    make degree-k components smooth across the axis.
    """
    width = 0.15 * (hi - lo)
    c_r = rng.normal(size=2)
    a0 = rng.normal(size=3)                       # x0: poly in cos(theta)
    a1 = rng.normal(size=2) + 1j * rng.normal(size=2)   # x1 / sin(theta)
    a2 = rng.normal(size=2) + 1j * rng.normal(size=2)   # x2 / sin^2(theta)

    def radial(rr):
        w, dw = _window(rr, lo, width, hi, width)
        p = c_r[0] + c_r[1] * rr
        return w * p, dw * p + w * c_r[1]

    def angular(tt):
        s, c = np.sin(tt), np.cos(tt)
        x0 = a0[0] + a0[1] * c + a0[2] * c * c
        dx0 = -(a0[1] + 2.0 * a0[2] * c) * s
        p1 = a1[0] + a1[1] * c
        x1 = s * p1
        dx1 = c * p1 - s * s * a1[1]
        p2 = a2[0] + a2[1] * c
        x2 = s * s * p2
        dx2 = 2.0 * s * c * p2 - s**3 * a2[1]
        return x0, dx0, x1, dx1, x2, dx2

    def pack(rad, ang0, ang1, ang2):
        out = np.empty(rad.shape + (5,))
        out[..., 0] = rad * ang0
        out[..., 1] = rad * ang1.real
        out[..., 2] = rad * ang1.imag
        out[..., 3] = rad * ang2.real
        out[..., 4] = rad * ang2.imag
        return out

    def value_fn(rr, tt):
        p, _ = radial(rr)
        x0, _, x1, _, x2, _ = angular(tt)
        return pack(p, x0, x1, x2)

    def d_r_fn(rr, tt):
        _, dp = radial(rr)
        x0, _, x1, _, x2, _ = angular(tt)
        return pack(dp, x0, x1, x2)

    def d_theta_fn(rr, tt):
        p, _ = radial(rr)
        _, dx0, _, dx1, _, dx2 = angular(tt)
        return pack(p, dx0, dx1, dx2)

    return TestField.from_callables(grid, value_fn, d_r_fn, d_theta_fn, rho=hi)


# --- the second variation ----------------------------------------------------

@dataclass(frozen=True)
class SecondVariationReport:
    """Quadrature of the projected form, with the unprojected cross-check."""

    value: float        # int |grad X_T|^2 - |grad w|^2 |X_T|^2
    first_form: float   # the expanded form in X and w.X
    discrepancy: float  # |value - first_form|

    def __float__(self):
        return self.value


def _az_sq(y):
    # |Y_1|^2 + 4 |Y_2|^2 of the azimuthal derivative weight
    return y[..., 1] ** 2 + y[..., 2] ** 2 + 4.0 * (y[..., 3] ** 2 + y[..., 4] ** 2)


def _az_dot(x, w):
    # Re(X_1 conj(W_1)) + 4 Re(X_2 conj(W_2))
    return (x[..., 1] * w[..., 1] + x[..., 2] * w[..., 2]
            + 4.0 * (x[..., 3] * w[..., 3] + x[..., 4] * w[..., 4]))


def second_variation(base, field: TestField) -> SecondVariationReport:
    """Second variation of the Dirichlet energy at a 0-homogeneous base.

    Integrates the projected form; the equivalent expanded form (equal after
    integration by parts against the harmonic-map equation) is returned
    alongside as a consistency check.
    """
    grid = field.grid
    if field.rho > grid.r_max + 1e-12:
        raise SupportOverflow(
            f"support radius {field.rho} exceeds the domain radius {grid.r_max}")
    r, wr, theta, wth = grid.nodes()
    w, dw, dens_const = _base_profile(base, theta)
    w = w[None, :, :]
    dw = dw[None, :, :]
    rr = r[:, None]
    rr_safe = np.where(rr == 0.0, 1.0, rr)
    ss = np.sin(theta)[None, :]

    x, xr, xth = field.values, field.d_r, field.d_theta
    f = np.sum(x * w, axis=-1)
    f_r = np.sum(xr * w, axis=-1)
    f_th = np.sum(xth * w, axis=-1) + np.sum(x * dw, axis=-1)
    dens = dens_const / rr_safe**2

    # projected form
    xt = x - f[..., None] * w
    xt_r = xr - f_r[..., None] * w
    xt_th = xth - f_th[..., None] * w - f[..., None] * dw
    grad_t = (np.sum(xt_r**2, axis=-1)
              + np.sum(xt_th**2, axis=-1) / rr_safe**2
              + _az_sq(xt) / (rr_safe * ss) ** 2)
    second = grad_t - dens * np.sum(xt**2, axis=-1)

    # expanded form
    grad_x = (np.sum(xr**2, axis=-1)
              + np.sum(xth**2, axis=-1) / rr_safe**2
              + _az_sq(x) / (rr_safe * ss) ** 2)
    grad_f = f_r**2 + f_th**2 / rr_safe**2
    cross = np.sum(xth * dw, axis=-1) / rr_safe**2 + _az_dot(x, w) / (rr_safe * ss) ** 2
    first = (grad_x + (4.0 * f**2 - np.sum(x**2, axis=-1)) * dens
             - grad_f - 4.0 * f * cross)

    # the r = 0 row carries no field (compact support away from the origin)
    second[0, :] = 0.0
    first[0, :] = 0.0
    measure_r = wr * r**2
    measure_th = wth * np.sin(theta)
    val2 = 2.0 * pi * float(measure_r @ second @ measure_th)
    val1 = 2.0 * pi * float(measure_r @ first @ measure_th)
    return SecondVariationReport(val2, val1, abs(val2 - val1))


# --- the omega_2 latitude identity ------------------------------------------

def _omega2_sides_once(s: SphereSpec, n_nodes: int):
    per = 16
    n_panels = max(1, n_nodes // per)
    x, wts = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(0.0, pi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * x[None, :]).ravel()
    weights = (half * np.broadcast_to(wts, (n_panels, per))).ravel()
    sn = np.sin(nodes)

    _, p1, p2 = profile_batch(s, nodes)
    w2 = p2.real
    # conformality: |d_theta w|^2 equals the azimuthal part, so the density
    # is 2 (|p1|^2 + 4 |p2|^2) / sin^2
    dens = 2.0 * (np.abs(p1) ** 2 + 4.0 * np.abs(p2) ** 2) / sn**2
    h = 1e-6
    _, _, p2p = profile_batch(s, nodes + h)
    _, _, p2m = profile_batch(s, nodes - h)
    dw2 = (p2p.real - p2m.real) / (2.0 * h)
    left = float(weights @ (w2**2 * dens * sn))
    right = float(weights @ ((dw2**2 + 4.0 * w2**2 / sn**2) * sn))
    return left, right


def omega2_identity_gap(s: SphereSpec, n_quad: int = 256) -> float:
    """|int w2^2 |grad_T w|^2 - int (|d_theta w2|^2 + 4 w2^2 / sin^2)| on S^2.

    Both sides are latitude quadratures (the common 2*pi azimuth factor is
    dropped).  Parameters must be real so w2 is a real profile.
    """
    if s.kind == "full":
        if abs(s.mu1.imag) > 0 or abs(s.mu2.imag) > 0 or s.mu1.real <= 0 or s.mu2.real <= 0:
            raise InvalidSpec("identity quadrature needs real positive parameters")
    elif s.kind == "degenerate":
        if abs(s.mu.imag) > 0 or s.mu.real <= 0:
            raise InvalidSpec("identity quadrature needs a real positive parameter")
    n = max(64, n_quad)
    cap = 1 << 14
    left, right = _omega2_sides_once(s, n)
    gap = abs(left - right)
    while n < cap:
        n *= 2
        left2, right2 = _omega2_sides_once(s, n)
        gap2 = abs(left2 - right2)
        if abs(left2 - left) <= 1e-8 * max(1.0, abs(left2)) and \
           abs(right2 - right) <= 1e-8 * max(1.0, abs(right2)):
            return gap2
        left, right, gap = left2, right2, gap2
    raise QuadratureUnderResolved("identity quadrature failed to settle")
