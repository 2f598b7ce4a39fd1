"""Analytic catalog of S1-equivariant harmonic spheres S^2 -> S^4.

The target S^4 is the unit sphere of R (+) C (+) C (split Q-tensor
coordinates); equivariant maps have the shape

    omega(theta, phi) = (p0(theta), p1(theta) e^{i phi}, p2(theta) e^{2i phi}).

Three families exhaust the equivariant harmonic maps:

* degenerate degree-k maps (k = 1, 2), energy 4*pi*k: an equatorial 2-sphere
  embedding precomposed with z -> mu z^k in the stereographic chart;
* linearly full maps with two complex parameters (mu1, mu2), energy 12*pi,
  obtained by projecting the horizontal algebraic curve
  [z0^3, mu1 z0^2 z1, mu2 z0 z1^2, -(mu1 mu2 /3) z1^3] through the twistor
  fibration tau: CP^3 -> S^4;
* the equatorial embeddings themselves (mu = 1 degenerate maps).

Everything is evaluated in homogeneous coordinates [z0, z1] on CP^1 so the
poles need no special casing.  All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, hypot, pi, sin, sqrt

import numpy as np

from .errors import (
    BothZero,
    DegenerateJet,
    InvalidSpec,
    PoleProximity,
    QuadratureUnderResolved,
    ZeroVector,
)
from .tensor_core import SplitPoint

SQRT3 = sqrt(3.0)


# --- points on the source sphere --------------------------------------------

@dataclass(frozen=True)
class S2Point:
    """Point of S^2 in homogeneous coordinates [z0, z1].

    z = z1/z0 is the stereographic chart from the south pole, so [1, 0] is the
    north pole and [0, 1] the south pole.
    """

    z0: complex
    z1: complex

    def __post_init__(self):
        if abs(self.z0) == 0.0 and abs(self.z1) == 0.0:
            raise BothZero("[0, 0] is not a point of CP^1")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "S2Point":
        return cls(cos(theta / 2.0), sin(theta / 2.0) * np.exp(1j * phi))

    @classmethod
    def from_vector(cls, x) -> "S2Point":
        x = np.asarray(x, dtype=float)
        theta = atan2(hypot(x[0], x[1]), x[2])
        phi = atan2(x[1], x[0])
        return cls.from_angles(theta, phi)

    @classmethod
    def from_complex(cls, z: complex) -> "S2Point":
        z = complex(z)
        if np.isinf(z.real) or np.isinf(z.imag):
            return cls(0.0, 1.0)
        return cls(1.0, z)

    @property
    def vector(self) -> np.ndarray:
        n = abs(self.z0) ** 2 + abs(self.z1) ** 2
        w = 2.0 * np.conj(self.z0) * self.z1 / n
        return np.array([w.real, w.imag, (abs(self.z0) ** 2 - abs(self.z1) ** 2) / n])

    @property
    def angles(self):
        x = self.vector
        return atan2(hypot(x[0], x[1]), x[2]), atan2(x[1], x[0]) % (2.0 * pi)


# --- stereographic projections ----------------------------------------------

def stereo2(x) -> complex:
    """Stereographic chart of S^2 from the south pole; south maps to inf."""
    x = np.asarray(x, dtype=float)
    if 1.0 + x[2] <= 1e-300:
        return complex(np.inf, 0.0)
    return complex(x[0], x[1]) / (1.0 + x[2])


def stereo2_inv(z: complex) -> np.ndarray:
    """Inverse chart; accepts inf and returns the south pole exactly."""
    z = complex(z)
    if np.isinf(z.real) or np.isinf(z.imag):
        return np.array([0.0, 0.0, -1.0])
    d = 1.0 + abs(z) ** 2
    return np.array([2.0 * z.real / d, 2.0 * z.imag / d, (1.0 - abs(z) ** 2) / d])


def stereo4(p: SplitPoint):
    """Chart of S^4 from (-1, 0, 0): (zeta1, zeta2)/(1 + t)."""
    return p.zeta1 / (1.0 + p.t), p.zeta2 / (1.0 + p.t)


def stereo4_inv(eta1: complex, eta2: complex) -> SplitPoint:
    d = 1.0 + abs(eta1) ** 2 + abs(eta2) ** 2
    return SplitPoint((2.0 - d) / d, 2.0 * eta1 / d, 2.0 * eta2 / d)


# --- the catalog ------------------------------------------------------------

@dataclass(frozen=True)
class SphereSpec:
    """Catalog entry; build through the classmethod constructors."""

    kind: str                 # "degenerate" | "full" | "equatorial"
    k: int = 0                # degree for degenerate/equatorial
    mu: complex = 0.0         # degenerate parameter
    sign: int = 1             # degenerate: image orientation on the 2-sphere
    mu1: complex = 0.0        # full parameters
    mu2: complex = 0.0

    def __post_init__(self):
        if self.kind == "degenerate":
            if self.k not in (1, 2):
                raise InvalidSpec(f"degenerate degree must be 1 or 2, got {self.k}")
            if abs(self.mu) == 0.0:
                raise InvalidSpec("degenerate parameter mu must be nonzero")
            if self.sign not in (1, -1):
                raise InvalidSpec("sign must be +1 or -1")
        elif self.kind == "equatorial":
            if self.k not in (1, 2):
                raise InvalidSpec(f"equatorial degree must be 1 or 2, got {self.k}")
        elif self.kind != "full":
            raise InvalidSpec(f"unknown kind {self.kind!r}")

    @classmethod
    def degenerate(cls, k: int, mu: complex, sign: int = 1) -> "SphereSpec":
        return cls(kind="degenerate", k=k, mu=complex(mu), sign=sign)

    @classmethod
    def full(cls, mu1: complex, mu2: complex) -> "SphereSpec":
        return cls(kind="full", mu1=complex(mu1), mu2=complex(mu2))

    @classmethod
    def equatorial(cls, k: int) -> "SphereSpec":
        return cls(kind="equatorial", k=k)

    @property
    def linearly_full(self) -> bool:
        return self.kind == "full" and abs(self.mu1) != 0.0 and abs(self.mu2) != 0.0

    @property
    def energy_expected(self) -> float:
        """Quantized energy 4*pi*|degree| of the member."""
        if self.kind == "full":
            if self.linearly_full:
                return 12.0 * pi
            if abs(self.mu1) != 0.0:
                return 4.0 * pi
            if abs(self.mu2) != 0.0:
                return 8.0 * pi
            return 0.0
        return 4.0 * pi * self.k


VERONESE = SphereSpec.full(SQRT3, SQRT3)


def eval_sphere(s: SphereSpec, p: S2Point) -> SplitPoint:
    """Evaluate the catalog map at a point; the result is unit-norm."""
    if s.kind == "full":
        a = abs(p.z0) ** 2
        b = abs(p.z1) ** 2
        u = np.conj(p.z0) * p.z1
        m1 = abs(s.mu1) ** 2
        m2 = abs(s.mu2) ** 2
        d = a**3 + m1 * a**2 * b + m2 * a * b**2 + m1 * m2 * b**3 / 9.0
        w0 = (a**3 - m1 * a**2 * b - m2 * a * b**2 + m1 * m2 * b**3 / 9.0) / d
        w1 = 2.0 * s.mu1 * u * (a**2 - m2 * b**2 / 3.0) / d
        w2 = 2.0 * s.mu2 * u**2 * (a + m1 * b / 3.0) / d
        return SplitPoint(float(w0), complex(w1), complex(w2))

    k = s.k
    mu = 1.0 + 0.0j if s.kind == "equatorial" else s.mu
    sign = 1 if s.kind == "equatorial" else s.sign
    # compose: chart -> z -> mu z^k -> inverse chart -> equatorial embedding,
    # all in homogeneous coordinates so both poles are ordinary points
    av = p.z0**k
    bv = mu * p.z1**k
    n = abs(av) ** 2 + abs(bv) ** 2
    x3 = (abs(av) ** 2 - abs(bv) ** 2) / n
    zeta = 2.0 * np.conj(av) * bv / n
    if k == 1:
        return SplitPoint(sign * float(x3), sign * complex(zeta), 0.0)
    return SplitPoint(sign * float(x3), 0.0, sign * complex(zeta))


def sphere_profile(s: SphereSpec, theta: float):
    """Latitude profile (p0, p1, p2) at phi = 0."""
    w = eval_sphere(s, S2Point.from_angles(theta, 0.0))
    return w.t, w.zeta1, w.zeta2


def profile_batch(s: SphereSpec, thetas):
    """Vectorized latitude profile; returns (p0, p1, p2) arrays at phi = 0."""
    thetas = np.asarray(thetas, dtype=float)
    a = np.cos(thetas / 2.0) ** 2
    b = np.sin(thetas / 2.0) ** 2
    u = np.cos(thetas / 2.0) * np.sin(thetas / 2.0)
    if s.kind == "full":
        m1 = abs(s.mu1) ** 2
        m2 = abs(s.mu2) ** 2
        d = a**3 + m1 * a**2 * b + m2 * a * b**2 + m1 * m2 * b**3 / 9.0
        p0 = (a**3 - m1 * a**2 * b - m2 * a * b**2 + m1 * m2 * b**3 / 9.0) / d
        p1 = 2.0 * s.mu1 * u * (a**2 - m2 * b**2 / 3.0) / d
        p2 = 2.0 * s.mu2 * u**2 * (a + m1 * b / 3.0) / d
        return p0, p1.astype(complex), p2.astype(complex)
    k = s.k
    mu = 1.0 + 0.0j if s.kind == "equatorial" else s.mu
    sign = 1 if s.kind == "equatorial" else s.sign
    av = np.cos(thetas / 2.0) ** k
    bv = mu * np.sin(thetas / 2.0) ** k
    n = np.abs(av) ** 2 + np.abs(bv) ** 2
    p0 = sign * (np.abs(av) ** 2 - np.abs(bv) ** 2) / n
    zeta = sign * 2.0 * np.conj(av) * bv / n
    zero = np.zeros_like(zeta)
    if k == 1:
        return p0, zeta, zero
    return p0, zero, zeta


# --- twistor curves and the fibration ---------------------------------------

@dataclass(frozen=True)
class TwistorCurve:
    """Equivariant algebraic curve CP^1 -> CP^3 with parameter 4-vector mu."""

    mu: tuple

    def __post_init__(self):
        mu = tuple(complex(m) for m in self.mu)
        if len(mu) != 4:
            raise InvalidSpec("need four parameters")
        if sum(1 for m in mu if abs(m) > 0.0) < 2:
            raise InvalidSpec("need at least two nonzero parameters")
        object.__setattr__(self, "mu", mu)

    @property
    def horizontal(self) -> bool:
        m = self.mu
        return abs(m[0] * m[3] + m[1] * m[2] / 3.0) <= 1e-12


def canonical_rep(w) -> np.ndarray:
    """Canonical CP^3 representative: unit norm, first sizable entry real > 0."""
    w = np.asarray(w, dtype=complex)
    n = np.linalg.norm(w)
    if n == 0.0:
        raise ZeroVector("zero vector has no projective class")
    w = w / n
    for entry in w:
        if abs(entry) > 1e-8:
            return w * (np.conj(entry) / abs(entry))
    # fall back to the largest entry for vectors with all-tiny leading terms
    j = int(np.argmax(np.abs(w)))
    return w * (np.conj(w[j]) / abs(w[j]))


def projective_distance(w, v) -> float:
    """Fubini-Study-compatible distance min_phase ||w - e^{i phi} v||."""
    w = canonical_rep(w)
    v = canonical_rep(v)
    ip = abs(np.vdot(w, v))
    return sqrt(max(0.0, 2.0 - 2.0 * min(1.0, ip)))


def twistor_curve_eval(c: TwistorCurve, p: S2Point) -> np.ndarray:
    """Canonical representative of [mu0 z0^3, mu1 z0^2 z1, mu2 z0 z1^2, mu3 z1^3]."""
    m = c.mu
    w = np.array([
        m[0] * p.z0**3,
        m[1] * p.z0**2 * p.z1,
        m[2] * p.z0 * p.z1**2,
        m[3] * p.z1**3,
    ])
    return canonical_rep(w)


def twistor_project(w) -> SplitPoint:
    """Twistor fibration tau: CP^3 -> S^4 in homogeneous coordinates."""
    w = np.asarray(w, dtype=complex)
    n = float(np.sum(np.abs(w) ** 2))
    if n == 0.0:
        raise ZeroVector("tau needs a nonzero representative")
    t = (abs(w[0]) ** 2 + abs(w[3]) ** 2 - abs(w[1]) ** 2 - abs(w[2]) ** 2) / n
    z1 = 2.0 * (np.conj(w[0]) * w[1] + np.conj(w[2]) * w[3]) / n
    z2 = 2.0 * (np.conj(w[0]) * w[2] - np.conj(w[1]) * w[3]) / n
    return SplitPoint(float(t), complex(z1), complex(z2))


def horizontality_residual(c: TwistorCurve, n_samples: int = 0, seed: int = 0):
    """Algebraic horizontality defect |mu0 mu3 + mu1 mu2 / 3|.

    With n_samples > 0 also reports the sampled maximum of |Psi^* Theta|,
    the contact form Theta = w0 dw3 - w3 dw0 + w1 dw2 - w2 dw1 pulled back
    through the curve in the affine chart z -> (mu0, mu1 z, mu2 z^2, mu3 z^3).
    """
    m = c.mu
    algebraic = abs(m[0] * m[3] + m[1] * m[2] / 3.0)
    if n_samples <= 0:
        return algebraic, None
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        z = rng.uniform(0.2, 2.0) * np.exp(1j * rng.uniform(0, 2 * pi))
        w = np.array([m[0], m[1] * z, m[2] * z**2, m[3] * z**3])
        dw = np.array([0.0, m[1], 2.0 * m[2] * z, 3.0 * m[3] * z**2])
        theta = w[0] * dw[3] - w[3] * dw[0] + w[1] * dw[2] - w[2] * dw[1]
        scale = float(np.linalg.norm(w) * np.linalg.norm(dw))
        if scale > 0:
            worst = max(worst, abs(theta) / scale)
    return algebraic, worst


# --- quadrature: energy ------------------------------------------------------

def _energy_once(s: SphereSpec, n_nodes: int) -> float:
    # panels of 16-point Gauss-Legendre over [0, pi]; integrand
    # 2*pi*(|p1|^2 + 4|p2|^2)/sin(theta) via the conformality reduction
    per = 16
    n_panels = max(1, n_nodes // per)
    x, wts = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(0.0, pi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * x[None, :]).ravel()
    weights = (half * np.broadcast_to(wts, (n_panels, per))).ravel()
    _, p1, p2 = profile_batch(s, nodes)
    dens = (np.abs(p1) ** 2 + 4.0 * np.abs(p2) ** 2) / np.sin(nodes)
    return 2.0 * pi * float(weights @ dens)


def sphere_energy(s: SphereSpec, n_quad: int = 64) -> float:
    """Dirichlet energy by adaptive 1D latitude quadrature.

    Equivariance plus conformality collapse the energy density to
    2(|p1|^2 + 4|p2|^2)/sin^2(theta); the phi integral contributes 2*pi.
    Doubles the node count until successive values agree to 1e-6 relative.
    """
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    cap = 1 << 14
    n = n_quad
    prev = _energy_once(s, n)
    while n < cap:
        n *= 2
        cur = _energy_once(s, n)
        if abs(cur - prev) <= 1e-6 * max(1.0, abs(cur)):
            return cur
        prev = cur
    final = _energy_once(s, cap * 2)
    if abs(final - prev) > 1e-4 * max(1.0, abs(final)):
        raise QuadratureUnderResolved(
            f"energy quadrature not settled: {prev} vs {final}")
    return final


# --- finite-difference identity checks --------------------------------------

def _omega5(s: SphereSpec, theta: float, phi: float) -> np.ndarray:
    w = eval_sphere(s, S2Point.from_angles(theta, phi))
    return np.array([w.t, w.zeta1.real, w.zeta1.imag, w.zeta2.real, w.zeta2.imag])


def _check_pole_distance(theta: float, h: float):
    if not 1e-5 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-5, 1e-2]")
    if theta < 10.0 * h or pi - theta < 10.0 * h:
        raise PoleProximity(f"theta = {theta} within 10h of a pole")


def energy_density(s: SphereSpec, theta: float, h: float = 1e-5) -> float:
    """|grad_T omega|^2 = |d omega/d theta|^2 + (|p1|^2 + 4|p2|^2)/sin^2 theta.

    The theta derivative is a central difference of the latitude profile; the
    azimuthal part is analytic from the equivariant phase structure.
    """
    if theta < 2 * h or pi - theta < 2 * h:
        raise PoleProximity(f"theta = {theta} too close to a pole")
    fp = _omega5(s, theta + h, 0.0)
    fm = _omega5(s, theta - h, 0.0)
    dth = (fp - fm) / (2.0 * h)
    _, p1, p2 = sphere_profile(s, theta)
    return float(np.sum(dth**2)) + (abs(p1) ** 2 + 4.0 * abs(p2) ** 2) / sin(theta) ** 2


def tension_residual(s: SphereSpec, theta: float, phi: float = 0.0,
                     h: float = 1e-3) -> float:
    """|| Delta_T omega + |grad_T omega|^2 omega || by second-order FD.

    Delta_T = d^2/dtheta^2 + cot(theta) d/dtheta + sin(theta)^{-2} d^2/dphi^2
    on the sphere; vanishes identically for harmonic members, so the returned
    number is pure truncation error, O(h^2).
    """
    _check_pole_distance(theta, h)
    f0 = _omega5(s, theta, phi)
    ftp = _omega5(s, theta + h, phi)
    ftm = _omega5(s, theta - h, phi)
    fpp = _omega5(s, theta, phi + h)
    fpm = _omega5(s, theta, phi - h)
    d2t = (ftp - 2.0 * f0 + ftm) / h**2
    dt = (ftp - ftm) / (2.0 * h)
    d2p = (fpp - 2.0 * f0 + fpm) / h**2
    dp = (fpp - fpm) / (2.0 * h)
    st = sin(theta)
    lap = d2t + (cos(theta) / st) * dt + d2p / st**2
    grad2 = float(np.sum(dt**2)) + float(np.sum(dp**2)) / st**2
    return float(np.linalg.norm(lap + grad2 * f0))


@dataclass(frozen=True)
class ConformalityReport:
    theta_gap: float       # | |d_theta w|^2 - sin^-2 |d_phi w|^2 |
    cross_gap: float       # | d_theta w . sin^-1 d_phi w |
    conf_residual: float   # | xi_zb xib_zb + eta_zb etab_zb |
    iso_residual: float    # | xi_zbzb xib_zbzb + eta_zbzb etab_zbzb |


def _xi_eta(s: SphereSpec):
    # The chart pair (xi, eta) = sigma_4(omega) is only regular on C when
    # omega(north) = (1, 0, 0).  Members hitting the antipode there (the
    # sign = -1 degenerate maps) are composed with x -> -x first, which
    # preserves harmonicity and equivariance.
    flip = 1.0 if eval_sphere(s, S2Point(1.0, 0.0)).t > 0.0 else -1.0

    def f(z: complex):
        w = eval_sphere(s, S2Point.from_complex(z))
        t, z1, z2 = flip * w.t, flip * w.zeta1, flip * w.zeta2
        return z1 / (1.0 + t), z2 / (1.0 + t)
    return f


def _wirtinger(f, z: complex, h: float):
    """(df/dz, df/dzbar) by fourth-order central differences."""
    def d4(step):
        return (-f(z + 2 * step) + 8.0 * f(z + step)
                - 8.0 * f(z - step) + f(z - 2 * step)) / (12.0 * h)
    da = d4(h)
    db = d4(1j * h)
    return 0.5 * (da - 1j * db), 0.5 * (da + 1j * db)


def _wirtinger_zbzb(f, z: complex, h: float):
    """Second derivative d^2 f / dzbar^2 = (f_aa - f_bb + 2i f_ab)/4."""
    f0 = f(z)

    def d4sq(w0, step):
        return (-f(w0 + 2 * step) + 16.0 * f(w0 + step) - 30.0 * f0
                + 16.0 * f(w0 - step) - f(w0 - 2 * step)) / (12.0 * h**2)

    def db(w):
        return (-f(w + 2j * h) + 8.0 * f(w + 1j * h)
                - 8.0 * f(w - 1j * h) + f(w - 2j * h)) / (12.0 * h)

    faa = d4sq(z, h)
    fbb = d4sq(z, 1j * h)
    fab = (-db(z + 2 * h) + 8.0 * db(z + h)
           - 8.0 * db(z - h) + db(z - 2 * h)) / (12.0 * h)
    return 0.25 * (faa - fbb + 2j * fab)


def conformality_gap(s: SphereSpec, theta: float, phi: float = 0.0,
                     h: float = 1e-3) -> ConformalityReport:
    """Conformality of the map in both the spherical and the chart pictures."""
    _check_pole_distance(theta, h)
    ftp = _omega5(s, theta + h, phi)
    ftm = _omega5(s, theta - h, phi)
    fpp = _omega5(s, theta, phi + h)
    fpm = _omega5(s, theta, phi - h)
    dt = (ftp - ftm) / (2.0 * h)
    dp = (fpp - fpm) / (2.0 * h)
    st = sin(theta)
    theta_gap = abs(float(np.sum(dt**2)) - float(np.sum(dp**2)) / st**2)
    cross_gap = abs(float(np.sum(dt * dp)) / st)

    fxi = _xi_eta(s)
    z = np.tan(theta / 2.0) * np.exp(1j * phi)
    dxi_z, dxi_zb = _wirtinger(lambda w: fxi(w)[0], z, h)
    deta_z, deta_zb = _wirtinger(lambda w: fxi(w)[1], z, h)
    xib_zb = np.conj(dxi_z)
    etab_zb = np.conj(deta_z)
    conf = abs(dxi_zb * xib_zb + deta_zb * etab_zb)

    xi_zbzb = _wirtinger_zbzb(lambda w: fxi(w)[0], z, h)
    eta_zbzb = _wirtinger_zbzb(lambda w: fxi(w)[1], z, h)
    xib_zbzb = _wirtinger_zbzb(lambda w: np.conj(fxi(w)[0]), z, h)
    etab_zbzb = _wirtinger_zbzb(lambda w: np.conj(fxi(w)[1]), z, h)
    iso = abs(complex(xi_zbzb) * complex(xib_zbzb)
              + complex(eta_zbzb) * complex(etab_zbzb))
    return ConformalityReport(theta_gap, cross_gap, float(conf), float(iso))


# --- the twistor lift --------------------------------------------------------

@dataclass(frozen=True)
class LiftResult:
    w: np.ndarray      # canonical CP^3 representative
    branch: int        # which alternative of the lift formula was used
    sign: int          # orientation bookkeeping; +1 under catalog normalization


def twistor_lift(s: SphereSpec, z: complex, h: float = 1e-4) -> LiftResult:
    """Positive twistor lift of a linearly full member at z != 0.

    Builds xi = p1/(1+p0), eta = p2/(1+p0) in the stereographic chart, takes
    their Wirtinger derivatives by central differences, and assembles the
    lift quadruple; tau(lift) reproduces the map itself to O(h).
    """
    if not s.linearly_full:
        raise InvalidSpec("twistor lift only exists for linearly full members")
    z = complex(z)
    if abs(z) == 0.0:
        raise InvalidSpec("lift is evaluated away from z = 0")
    fxi = _xi_eta(s)
    dxi_z, dxi_zb = _wirtinger(lambda w: fxi(w)[0], z, h)
    deta_z, deta_zb = _wirtinger(lambda w: fxi(w)[1], z, h)
    xi, eta = fxi(z)
    xi_zb = complex(dxi_zb)
    eta_zb = complex(deta_zb)
    xib_zb = complex(np.conj(dxi_z))    # conj(f)_zbar = conj(f_z)
    etab_zb = complex(np.conj(deta_z))
    if max(abs(xib_zb), abs(eta_zb), abs(xi_zb), abs(etab_zb)) < 1e-12:
        raise DegenerateJet(f"all four jet entries below 1e-12 at z = {z}")
    if abs(xib_zb) + abs(eta_zb) >= abs(xi_zb) + abs(etab_zb):
        w = np.array([
            xib_zb,
            xib_zb * xi + eta_zb * np.conj(eta),
            xib_zb * eta - eta_zb * np.conj(xi),
            -eta_zb,
        ])
        branch = 1
    else:
        w = np.array([
            etab_zb,
            etab_zb * xi - xi_zb * np.conj(eta),
            etab_zb * eta + xi_zb * np.conj(xi),
            xi_zb,
        ])
        branch = 2
    return LiftResult(canonical_rep(w), branch, 1)
