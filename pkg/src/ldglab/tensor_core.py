"""Pointwise Q-tensor algebra.

A Q-tensor is a real symmetric traceless 3x3 matrix, stored canonically as its
five coordinates in the orthonormal basis

    e0 = diag(-1,-1,2)/sqrt(6)
    e1 = (x (x) z + z (x) x)/sqrt(2)      e2 = (y (x) z + z (x) y)/sqrt(2)
    e3 = (x (x) x - y (x) y)/sqrt(2)      e4 = (x (x) y + y (x) x)/sqrt(2)

so that the Frobenius norm of the matrix equals the Euclidean norm of the
coordinate vector.  Rotations about the z-axis act on the coordinate pairs
(a1,a2) and (a3,a4) as phase rotations of degree 1 and 2, which is what makes
the split form (t, zeta1, zeta2) = (a0, a1+i*a2, a3+i*a4) convenient: the
circle action becomes (t, e^{i a} zeta1, e^{2i a} zeta2).

Everything here is a pure function of immutable values; hot-loop helpers
(`cubic_invariant`, `cubic_invariant_gradient`) accept numpy arrays and
broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import acos, cos, pi, sin, sqrt

import numpy as np

from .errors import (
    NonPositiveParam,
    NotUnitNorm,
    NotUnitVector,
    NumericalOvershoot,
    ZeroTensor,
)

SQRT2 = sqrt(2.0)
SQRT6 = sqrt(6.0)

E0 = np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]) / SQRT6
E1 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]) / SQRT2
E2 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]) / SQRT2
E3 = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]]) / SQRT2
E4 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]) / SQRT2

BASIS = np.stack([E0, E1, E2, E3, E4])
for _b in (E0, E1, E2, E3, E4, BASIS):
    _b.setflags(write=False)


@dataclass(frozen=True)
class QTensor:
    """Q-tensor held as its 5 basis coordinates."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (5,):
            raise ValueError(f"QTensor needs 5 coordinates, got shape {a.shape}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "QTensor":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("expected a 3x3 matrix")
        if abs(np.trace(m)) > 1e-12 or np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError("matrix must be symmetric and traceless")
        return cls(np.tensordot(BASIS, m, axes=([1, 2], [0, 1])))

    @property
    def matrix(self) -> np.ndarray:
        return np.tensordot(self.a, BASIS, axes=(0, 0))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    def __neg__(self) -> "QTensor":
        return QTensor(-self.a)

    def __add__(self, other: "QTensor") -> "QTensor":
        return QTensor(self.a + other.a)

    def __sub__(self, other: "QTensor") -> "QTensor":
        return QTensor(self.a - other.a)


@dataclass(frozen=True)
class SplitPoint:
    """Image of a Q-tensor under the isometry S0 -> R (+) C (+) C."""

    t: float
    zeta1: complex
    zeta2: complex

    @property
    def norm(self) -> float:
        return sqrt(self.t ** 2 + abs(self.zeta1) ** 2 + abs(self.zeta2) ** 2)


@dataclass(frozen=True)
class MaterialParams:
    """Potential coefficients a^2, b^2, c^2 and elastic constant L."""

    a2: float
    b2: float
    c2: float
    L: float

    def __post_init__(self):
        for name in ("a2", "b2", "c2", "L"):
            v = getattr(self, name)
            if not v > 0.0:
                raise NonPositiveParam(f"{name} must be > 0, got {v}")


# --- scalar invariants ------------------------------------------------------

def cubic_invariant(t, zeta1, zeta2):
    """tr(Q^3) in split coordinates; broadcasts over arrays.

    For traceless symmetric Q, tr(Q^3) = 3 det(Q); expanding the determinant in
    basis coordinates gives

        tr(Q^3) = t^3/sqrt6 + 3 t (|z1|^2 - 2|z2|^2)/(2 sqrt6)
                  + 3 Re(z1^2 conj(z2))/(2 sqrt2).
    """
    m1 = np.abs(zeta1) ** 2
    m2 = np.abs(zeta2) ** 2
    cross = np.real(zeta1 ** 2 * np.conj(zeta2))
    return t ** 3 / SQRT6 + 3.0 * t * (m1 - 2.0 * m2) / (2.0 * SQRT6) \
        + 3.0 * cross / (2.0 * SQRT2)


def cubic_invariant_gradient(t, zeta1, zeta2):
    """Gradient of tr(Q^3) with respect to the five real coordinates.

    Returned as (d/dt, g1, g2) where g1, g2 are the complex pairs
    (d/da1 + i d/da2) and (d/da3 + i d/da4).  Useful identity:
    grad tr(Q^3) = 3 * coords(dev(Q^2)), so dev(Q^2) is this divided by 3.
    """
    m1 = np.abs(zeta1) ** 2
    m2 = np.abs(zeta2) ** 2
    dt = 3.0 * t ** 2 / SQRT6 + 3.0 * (m1 - 2.0 * m2) / (2.0 * SQRT6)
    g1 = 3.0 * t * zeta1 / SQRT6 + 3.0 * np.conj(zeta1) * zeta2 / SQRT2
    g2 = -SQRT6 * t * zeta2 + 3.0 * zeta1 ** 2 / (2.0 * SQRT2)
    return dt, g1, g2


def biaxiality(q: QTensor) -> float:
    """Signed biaxiality sqrt6 * tr(Q^3)/|Q|^3 in [-1, 1].

    +1 on positive uniaxial tensors, -1 on negative uniaxial, 0 at maximal
    biaxiality.  Clamps roundoff overshoot up to 1e-12; anything larger is an
    error, not noise.
    """
    n = q.norm
    if n <= 1e-14:
        raise ZeroTensor("biaxiality undefined at the zero tensor")
    p = split_iota(q)
    beta = SQRT6 * cubic_invariant(p.t, p.zeta1, p.zeta2) / n ** 3
    if abs(beta) > 1.0:
        if abs(beta) - 1.0 > 1e-12:
            raise NumericalOvershoot(f"biaxiality {beta} outside [-1,1]")
        beta = max(-1.0, min(1.0, beta))
    return float(beta)


def potential_w(q: QTensor) -> float:
    """Reduced potential W = (1 - biaxiality)/(3 sqrt6) on the unit sphere.

    Vanishes exactly on the positive uniaxial vacuum manifold.
    """
    if abs(q.norm - 1.0) > 1e-8:
        raise NotUnitNorm(f"potential_w needs |Q| = 1, got {q.norm}")
    return (1.0 - biaxiality(q)) / (3.0 * SQRT6)


# --- circle action and the split isometry -----------------------------------

def rotate(q: QTensor, alpha: float) -> QTensor:
    """Conjugate Q by the rotation of angle alpha about the z-axis."""
    c, s = cos(alpha), sin(alpha)
    r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return QTensor.from_matrix(r @ q.matrix @ r.T)


def split_iota(q: QTensor) -> SplitPoint:
    """Coordinates (t, zeta1, zeta2) = (Q:e0, Q:e1 + i Q:e2, Q:e3 + i Q:e4)."""
    a = q.a
    return SplitPoint(float(a[0]), complex(a[1], a[2]), complex(a[3], a[4]))


def join_iota(p: SplitPoint) -> QTensor:
    """Inverse of split_iota."""
    return QTensor(np.array([
        p.t, p.zeta1.real, p.zeta1.imag, p.zeta2.real, p.zeta2.imag,
    ]))


def uniaxial_from_director(v: np.ndarray) -> QTensor:
    """Unit-norm positive uniaxial tensor sqrt(3/2) (v (x) v - I/3)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("director must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise NotUnitVector(f"|v| = {np.linalg.norm(v)}")
    m = sqrt(1.5) * (np.outer(v, v) - np.eye(3) / 3.0)
    return QTensor.from_matrix(m)


# --- spectral data ----------------------------------------------------------

def _jacobi_eig(m: np.ndarray):
    # Cyclic Jacobi sweeps; plenty for 3x3 and fully deterministic.
    a = m.copy()
    v = np.eye(3)
    for _ in range(30):
        off = abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2])
        if off < 1e-15:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if abs(a[p, q]) < 1e-18:
                continue
            theta = 0.5 * (a[q, q] - a[p, p]) / a[p, q]
            t = np.sign(theta) / (abs(theta) + sqrt(theta * theta + 1.0)) \
                if theta != 0.0 else 1.0
            c = 1.0 / sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    return np.diag(a).copy(), v


def eigensystem(q: QTensor):
    """Eigenvalues ascending plus orthonormal eigenvectors (as columns).

    Closed-form trigonometric eigenvalues; eigenvectors by cross products of
    the shifted columns, falling back to Jacobi iteration near a degenerate
    spectrum.  Within a degenerate cluster the returned frame is made
    deterministic by flipping each vector so its largest-magnitude component
    is positive.
    """
    m = q.matrix
    # trace is 0, so the usual shift q = tr/3 drops out
    p2 = np.sum(m * m)  # tr(M^2)
    if p2 < 1e-28:
        return np.zeros(3), np.eye(3)
    p = sqrt(p2 / 6.0)
    b = m / p
    r = np.linalg.det(b) / 2.0
    degenerate = abs(abs(r) - 1.0) <= 1e-12
    r = max(-1.0, min(1.0, r))
    phi = acos(r) / 3.0
    lam3 = 2.0 * p * cos(phi)
    lam1 = 2.0 * p * cos(phi + 2.0 * pi / 3.0)
    lam2 = -lam1 - lam3
    lams = np.array([lam1, lam2, lam3])

    vecs = np.empty((3, 3))
    ok = not degenerate
    if ok:
        for k, lam in enumerate(lams):
            sh = m - lam * np.eye(3)
            c = np.cross(sh[:, 0], sh[:, 1])
            if np.linalg.norm(c) < 1e-10:
                c = np.cross(sh[:, 0], sh[:, 2])
            if np.linalg.norm(c) < 1e-10:
                c = np.cross(sh[:, 1], sh[:, 2])
            n = np.linalg.norm(c)
            if n < 1e-10:
                ok = False
                break
            vecs[:, k] = c / n
        if ok:
            resid = max(np.linalg.norm(m @ vecs[:, k] - lams[k] * vecs[:, k])
                        for k in range(3))
            ok = resid <= 1e-10
    if not ok:
        lams, vecs = _jacobi_eig(m)
        order = np.argsort(lams, kind="stable")
        lams = lams[order]
        vecs = vecs[:, order]
    for k in range(3):
        j = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[j, k] < 0.0:
            vecs[:, k] = -vecs[:, k]
    return lams, vecs


# --- material constants -----------------------------------------------------

def material_params(p: MaterialParams):
    """Derived scales (s_plus, lambda) of the rescaled model.

    s_plus is the positive root of the bulk-potential stationarity equation;
    lambda is the dimensionless coupling the rescaled energy sees.
    """
    s_plus = (p.b2 + sqrt(p.b2 ** 2 + 24.0 * p.a2 * p.c2)) / (4.0 * p.c2)
    lam = sqrt(2.0 / 3.0) * (p.b2 / p.L) * s_plus
    return s_plus, lam


def tangential_potential_gradient(q: QTensor) -> QTensor:
    """-(Q^2 - I/3 - tr(Q^3) Q): the sphere-tangential gradient of W at unit Q.

    Traceless, symmetric, and orthogonal to Q; vanishes at +/- e0.
    """
    if abs(q.norm - 1.0) > 1e-8:
        raise NotUnitNorm(f"needs |Q| = 1, got {q.norm}")
    m = q.matrix
    g = -(m @ m - np.eye(3) / 3.0 - np.trace(m @ m @ m) * m)
    return QTensor.from_matrix(g)
