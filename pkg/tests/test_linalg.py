import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmagnus.linalg import (
    DimensionError,
    SkewnessError,
    antihermitian_norms,
    as_matrix,
    commutator,
    expm_antihermitian,
    herm_eig,
    hermitian_norms,
    is_unitary,
    matmul,
    spectral_norm,
    spectral_norms,
    unitarity_defect,
)


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


@st.composite
def hermitian_matrices(draw, max_dim=6):
    n = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(1e-3, 10.0))
    return scale * random_hermitian(np.random.default_rng(seed), n)


def test_as_matrix_rejects_non_square():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        as_matrix(np.zeros(4))


def test_matmul_and_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.eye(2), np.eye(3))
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_commutator_of_pauli_matrices():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    np.testing.assert_array_equal(commutator(sx, sy), 2j * sz)


@settings(max_examples=40, deadline=None)
@given(hermitian_matrices(), hermitian_matrices())
def test_commutator_antisymmetric(X, Y):
    if X.shape != Y.shape:
        return
    np.testing.assert_allclose(commutator(X, Y), -commutator(Y, X), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(hermitian_matrices())
def test_herm_eig_reconstructs(H):
    eig = herm_eig(H)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    np.testing.assert_allclose(eig.reconstruct(), H, atol=1e-10 * max(1.0, np.abs(H).max()))


@settings(max_examples=40, deadline=None)
@given(hermitian_matrices())
def test_expm_matches_scipy_and_is_unitary(H):
    U = expm_antihermitian(-1j * H)
    np.testing.assert_allclose(U, scipy.linalg.expm(-1j * H), atol=1e-10)
    assert unitarity_defect(U) <= 1e-12 * max(1, H.shape[0])


def test_expm_of_zero_is_identity():
    np.testing.assert_array_equal(expm_antihermitian(np.zeros((3, 3))), np.eye(3))


def test_expm_rejects_non_skew():
    with pytest.raises(SkewnessError):
        expm_antihermitian(np.eye(2))


def test_unitarity_defect_detects_scaling():
    assert is_unitary(np.eye(4))
    assert not is_unitary(1.01 * np.eye(4))
    assert unitarity_defect(2 * np.eye(1)) == pytest.approx(3.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_spectral_norm_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)
    assert spectral_norm(M, method="power") == pytest.approx(np.linalg.norm(M, 2), rel=1e-8)


def test_spectral_norm_power_on_symmetric_problem_with_odd_top_vector():
    # the dominant singular vector is antisymmetric, orthogonal to a constant start
    M = np.diag([1.0, 0.5, 0.5, 1.0]).astype(complex)
    M[0, 3] = M[3, 0] = -2.0
    assert spectral_norm(M, method="power") == pytest.approx(np.linalg.norm(M, 2), rel=1e-9)


def test_spectral_norm_zero_and_unknown_method():
    assert spectral_norm(np.zeros((3, 3)), method="power") == 0.0
    with pytest.raises(ValueError):
        spectral_norm(np.eye(2), method="lanczos")


def test_stacked_norms_agree_with_scalar():
    rng = np.random.default_rng(3)
    Hs = np.stack([random_hermitian(rng, 5) for _ in range(4)])
    Ks = 1j * Hs
    Ms = Hs + rng.standard_normal(Hs.shape)
    ref = [np.linalg.norm(H, 2) for H in Hs]
    np.testing.assert_allclose(hermitian_norms(Hs), ref, rtol=1e-12)
    np.testing.assert_allclose(antihermitian_norms(Ks), ref, rtol=1e-12)
    # non-skew members fall back to the SVD
    np.testing.assert_allclose(antihermitian_norms(Ms), [np.linalg.norm(M, 2) for M in Ms], rtol=1e-12)
    np.testing.assert_allclose(spectral_norms(Ms), [np.linalg.norm(M, 2) for M in Ms], rtol=1e-12)
    np.testing.assert_allclose(spectral_norms(Ms, method="power"), [np.linalg.norm(M, 2) for M in Ms], rtol=1e-8)
