import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldglab import tensor_core as tc
from ldglab.errors import NonPositiveParam, NotUnitNorm, NotUnitVector, ZeroTensor

SQRT6 = np.sqrt(6.0)

E = [tc.QTensor(np.eye(5)[k]) for k in range(5)]


def rand_q(rng, scale=1.0):
    return tc.QTensor(scale * rng.standard_normal(5))


coords5 = st.lists(
    st.floats(-10, 10, allow_nan=False, allow_infinity=False), min_size=5, max_size=5
)


# --- basis and storage ------------------------------------------------------

def test_basis_orthonormal():
    g = np.einsum("aij,bij->ab", tc.BASIS, tc.BASIS)
    assert np.allclose(g, np.eye(5), atol=1e-15)


def test_basis_traceless_symmetric():
    for b in tc.BASIS:
        assert abs(np.trace(b)) < 1e-15
        assert np.allclose(b, b.T)


@given(coords5)
@settings(max_examples=100, deadline=None)
def test_matrix_roundtrip(a):
    q = tc.QTensor(np.array(a))
    m = q.matrix
    assert abs(np.trace(m)) <= 1e-14 * max(1.0, q.norm)
    assert np.max(np.abs(m - m.T)) <= 1e-14 * max(1.0, q.norm)
    # orthonormality: coordinate norm == Frobenius norm
    assert abs(np.sum(m * m) - q.norm**2) <= 1e-12 * max(1.0, q.norm**2)
    back = tc.QTensor.from_matrix(m)
    assert np.allclose(back.a, q.a, atol=1e-13)


# --- cubic invariant closed form vs dense-matrix oracle ---------------------

def test_cubic_invariant_matches_matrix_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        q = rand_q(rng, scale=3.0)
        p = tc.split_iota(q)
        m = q.matrix
        oracle = np.trace(m @ m @ m)
        val = tc.cubic_invariant(p.t, p.zeta1, p.zeta2)
        assert abs(val - oracle) <= 1e-12 * max(1.0, abs(oracle))


def test_cubic_invariant_gradient_matches_fd():
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(50):
        a = rng.standard_normal(5)

        def f(v):
            return tc.cubic_invariant(v[0], v[1] + 1j * v[2], v[3] + 1j * v[4])

        dt, g1, g2 = tc.cubic_invariant_gradient(a[0], a[1] + 1j * a[2], a[3] + 1j * a[4])
        grad = np.array([dt, g1.real, g1.imag, g2.real, g2.imag])
        for k in range(5):
            e = np.eye(5)[k]
            fd = (f(a + h * e) - f(a - h * e)) / (2 * h)
            assert abs(grad[k] - fd) <= 1e-6 * max(1.0, abs(fd))


# --- biaxiality -------------------------------------------------------------

def test_biaxiality_examples():
    assert tc.biaxiality(E[0]) == pytest.approx(1.0, abs=1e-14)
    assert tc.biaxiality(-E[0]) == pytest.approx(-1.0, abs=1e-14)
    q = tc.QTensor.from_matrix(np.diag([1.0, 0.0, -1.0]) / np.sqrt(2.0))
    assert tc.biaxiality(q) == pytest.approx(0.0, abs=1e-14)


def test_biaxiality_zero_tensor():
    with pytest.raises(ZeroTensor):
        tc.biaxiality(tc.QTensor(np.zeros(5)))


def test_biaxiality_range_and_rotation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(100):
        q = rand_q(rng)
        alpha = rng.uniform(0, 2 * np.pi)
        b = tc.biaxiality(q)
        assert -1.0 <= b <= 1.0
        assert abs(tc.biaxiality(tc.rotate(q, alpha)) - b) <= 1e-12


def test_biaxiality_clamp_boundary():
    # uniaxial tensors sit exactly at beta = 1; roundoff may overshoot by a few
    # ulp and the clamp must absorb that silently (no NumericalOvershoot)
    rng = np.random.default_rng(3)
    for _ in range(50):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        q = tc.uniaxial_from_director(v)
        assert tc.biaxiality(q) == pytest.approx(1.0, abs=1e-12)


# --- potential --------------------------------------------------------------

def test_potential_examples():
    assert tc.potential_w(E[0]) == pytest.approx(0.0, abs=1e-14)
    assert tc.potential_w(-E[0]) == pytest.approx(2.0 / (3.0 * SQRT6), abs=1e-12)
    q = tc.QTensor.from_matrix(np.diag([1.0, 0.0, -1.0]) / np.sqrt(2.0))
    assert tc.potential_w(q) == pytest.approx(1.0 / (3.0 * SQRT6), abs=1e-12)


def test_potential_requires_unit_norm():
    with pytest.raises(NotUnitNorm):
        tc.potential_w(tc.QTensor(np.array([2.0, 0, 0, 0, 0])))


# --- rotation and split -----------------------------------------------------

def test_rotate_examples():
    assert np.allclose(tc.rotate(E[0], 1.234).a, E[0].a, atol=1e-14)
    assert np.allclose(tc.rotate(E[1], np.pi / 2).a, E[2].a, atol=1e-14)
    assert np.allclose(tc.rotate(E[3], np.pi).a, E[3].a, atol=1e-14)


def test_rotate_matches_dense_conjugation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        q = rand_q(rng)
        alpha = rng.uniform(-4, 4)
        c, s = np.cos(alpha), np.sin(alpha)
        r = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        oracle = r @ q.matrix @ r.T
        assert np.max(np.abs(tc.rotate(q, alpha).matrix - oracle)) < 1e-13


def test_split_iota_basis_and_equivariance():
    p = tc.split_iota(E[0])
    assert (p.t, p.zeta1, p.zeta2) == (1.0, 0.0, 0.0)
    p = tc.split_iota(E[1])
    assert (p.t, p.zeta1, p.zeta2) == (0.0, 1.0, 0.0)
    rng = np.random.default_rng(13)
    for _ in range(100):
        q = rand_q(rng)
        alpha = rng.uniform(0, 2 * np.pi)
        p = tc.split_iota(q)
        pr = tc.split_iota(tc.rotate(q, alpha))
        assert abs(pr.t - p.t) <= 1e-12
        assert abs(pr.zeta1 - np.exp(1j * alpha) * p.zeta1) <= 1e-12
        assert abs(pr.zeta2 - np.exp(2j * alpha) * p.zeta2) <= 1e-12


@given(coords5)
@settings(max_examples=100, deadline=None)
def test_join_iota_roundtrip_and_isometry(a):
    q = tc.QTensor(np.array(a))
    p = tc.split_iota(q)
    assert abs(p.norm - q.norm) <= 1e-12 * max(1.0, q.norm)
    assert np.allclose(tc.join_iota(p).a, q.a, atol=1e-14)


# --- uniaxial lift ----------------------------------------------------------

def test_uniaxial_from_director_examples():
    assert np.allclose(tc.uniaxial_from_director([0, 0, 1]).a, E[0].a, atol=1e-14)
    assert np.allclose(tc.uniaxial_from_director([0, 0, -1]).a, E[0].a, atol=1e-14)
    with pytest.raises(NotUnitVector):
        tc.uniaxial_from_director([1, 1, 0])


def test_uniaxial_from_director_properties():
    rng = np.random.default_rng(17)
    for _ in range(100):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        q = tc.uniaxial_from_director(v)
        assert abs(q.norm - 1.0) <= 1e-12
        assert tc.biaxiality(q) == pytest.approx(1.0, abs=1e-12)


# --- eigensystem ------------------------------------------------------------

def test_eigensystem_examples():
    lam, v = tc.eigensystem(E[0])
    assert np.allclose(lam, [-1 / SQRT6, -1 / SQRT6, 2 / SQRT6], atol=1e-12)
    assert np.allclose(v[:, 2], [0, 0, 1], atol=1e-12)
    lam, _ = tc.eigensystem(-E[0])
    assert np.allclose(lam, [-2 / SQRT6, 1 / SQRT6, 1 / SQRT6], atol=1e-12)
    q = tc.QTensor.from_matrix(np.diag([1.0, 0.0, -1.0]) / np.sqrt(2.0))
    lam, _ = tc.eigensystem(q)
    assert np.allclose(lam, [-1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)], atol=1e-12)


def test_eigensystem_against_eigh():
    rng = np.random.default_rng(19)
    for _ in range(300):
        q = rand_q(rng)
        lam, v = tc.eigensystem(q)
        m = q.matrix
        assert abs(np.sum(lam)) <= 1e-12 * max(1.0, q.norm)
        assert np.all(np.diff(lam) >= -1e-12)
        oracle = np.linalg.eigvalsh(m)
        assert np.allclose(lam, oracle, atol=1e-10 * max(1.0, q.norm))
        for k in range(3):
            assert np.linalg.norm(m @ v[:, k] - lam[k] * v[:, k]) <= 1e-10 * max(1.0, q.norm)
        assert np.allclose(v.T @ v, np.eye(3), atol=1e-9)


def test_eigensystem_degenerate_deterministic():
    # uniaxial tensors have a double eigenvalue; output must still satisfy the
    # contract and be reproducible
    rng = np.random.default_rng(23)
    for _ in range(50):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        q = tc.uniaxial_from_director(v)
        lam1, vec1 = tc.eigensystem(q)
        lam2, vec2 = tc.eigensystem(q)
        assert np.array_equal(lam1, lam2)
        assert np.array_equal(vec1, vec2)
        m = q.matrix
        for k in range(3):
            assert np.linalg.norm(m @ vec1[:, k] - lam1[k] * vec1[:, k]) <= 1e-10


# --- material params --------------------------------------------------------

def test_material_params_examples():
    p = tc.MaterialParams(1.0, 1.0, 1.0, 1.0)
    s_plus, lam = tc.material_params(p)
    assert s_plus == pytest.approx(1.5, abs=1e-15)
    assert lam == pytest.approx(np.sqrt(1.5), abs=1e-12)
    p = tc.MaterialParams(1.0, 1e-30, 1.0, 1.0)
    s_plus, _ = tc.material_params(p)
    assert s_plus == pytest.approx(np.sqrt(6) / 2, rel=1e-12)


def test_material_params_positive():
    with pytest.raises(NonPositiveParam):
        tc.MaterialParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(NonPositiveParam):
        tc.MaterialParams(1.0, 1.0, 1.0, -2.0)


# --- tangential potential gradient ------------------------------------------

def test_tangential_gradient_critical_points():
    z = np.zeros(5)
    assert np.allclose(tc.tangential_potential_gradient(E[0]).a, z, atol=1e-13)
    assert np.allclose(tc.tangential_potential_gradient(-E[0]).a, z, atol=1e-13)


def test_tangential_gradient_structure():
    rng = np.random.default_rng(29)
    for _ in range(50):
        a = rng.standard_normal(5)
        a /= np.linalg.norm(a)
        q = tc.QTensor(a)
        g = tc.tangential_potential_gradient(q)
        m = g.matrix
        assert abs(np.trace(m)) <= 1e-10
        assert np.max(np.abs(m - m.T)) <= 1e-10
        assert abs(np.dot(g.a, q.a)) <= 1e-10


def test_tangential_gradient_matches_fd_of_potential():
    # central differences of W along random tangent directions on the sphere,
    # step 1e-5; -grad W points along the returned tensor
    rng = np.random.default_rng(31)
    h = 1e-5
    for _ in range(30):
        a = rng.standard_normal(5)
        a /= np.linalg.norm(a)
        q = tc.QTensor(a)
        g = tc.tangential_potential_gradient(q).a
        for _ in range(3):
            d = rng.standard_normal(5)
            d -= np.dot(d, a) * a
            d /= np.linalg.norm(d)
            ap = (a + h * d) / np.linalg.norm(a + h * d)
            am = (a - h * d) / np.linalg.norm(a - h * d)
            fd = (tc.potential_w(tc.QTensor(ap)) - tc.potential_w(tc.QTensor(am))) / (2 * h)
            assert abs(np.dot(g, d) - fd) <= 1e-6


def test_tangential_gradient_requires_unit_norm():
    with pytest.raises(NotUnitNorm):
        tc.tangential_potential_gradient(tc.QTensor(np.array([0.5, 0, 0, 0, 0])))
