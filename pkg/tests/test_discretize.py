import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmagnus.discretize import (
    Grid1D,
    InteractionOracle,
    PotentialSpec,
    build_kinetic,
    build_potential,
    dft_matrix,
    schrodinger_oracle,
)
from ipmagnus.quadrature import gauss_legendre, nested_simplex, triangular_simplex


def test_grid_nodes_and_spacing():
    g = Grid1D(8)
    assert g.spacing == pytest.approx(np.pi / 4)
    assert g.nodes[0] == -np.pi
    assert g.nodes[-1] == pytest.approx(np.pi - np.pi / 4)
    with pytest.raises(ValueError):
        Grid1D(1)


def test_kinetic_needs_three_points():
    with pytest.raises(ValueError):
        build_kinetic(Grid1D(2))


@pytest.mark.parametrize("n", [3, 4, 16, 33])
def test_kinetic_spectrum_matches_dense_eigensolver(n):
    kin = build_kinetic(Grid1D(n))
    A = kin.matrix
    np.testing.assert_allclose(A, A.conj().T)
    np.testing.assert_allclose(np.sort(kin.eigenvalues), np.linalg.eigvalsh(A), atol=1e-10)
    F = kin.fourier
    np.testing.assert_allclose(F @ np.diag(kin.eigenvalues) @ F.conj().T, A, atol=1e-10)


def test_kinetic_entries_and_top_eigenvalue():
    n = 16
    dx = 2 * np.pi / n
    kin = build_kinetic(Grid1D(n))
    assert kin.matrix[0, 0] == pytest.approx(1 / dx**2)
    assert kin.matrix[0, n - 1] == pytest.approx(-0.5 / dx**2)
    assert kin.eigenvalues.max() == pytest.approx(2 / dx**2)
    assert kin.eigenvalues[0] == 0.0


def test_dft_is_unitary():
    F = dft_matrix(12)
    np.testing.assert_allclose(F.conj().T @ F, np.eye(12), atol=1e-13)


def test_potential_specs():
    g = Grid1D(8)
    np.testing.assert_allclose(PotentialSpec.cos().values(g), np.cos(g.nodes))
    np.testing.assert_allclose(PotentialSpec.half_cos().values(g), 0.5 * np.cos(g.nodes))
    assert not PotentialSpec.zero().values(g).any()
    np.testing.assert_array_equal(PotentialSpec.constant(2.5).values(g), np.full(8, 2.5))
    assert PotentialSpec.parse("constant:0.5") == PotentialSpec.constant(0.5)
    assert PotentialSpec.parse("HalfCos") == PotentialSpec.half_cos()
    with pytest.raises(ValueError):
        PotentialSpec.parse("gaussian")
    with pytest.raises(ValueError):
        PotentialSpec.from_samples([1j, 0])
    with pytest.raises(ValueError):
        PotentialSpec.from_samples([1.0, 2.0]).values(g)
    B = build_potential(g, PotentialSpec.cos())
    np.testing.assert_array_equal(np.diag(np.diag(B)), B)


def _dense_oracle_value(n, pot, t):
    g = Grid1D(n)
    A = build_kinetic(g).matrix
    B = build_potential(g, pot)
    U = scipy.linalg.expm(1j * A * t)
    return U @ B @ U.conj().T, A, B


@settings(max_examples=25, deadline=None)
@given(st.floats(-3.0, 3.0))
def test_interaction_generator_matches_dense_expm(t):
    n = 12
    ref, _, _ = _dense_oracle_value(n, PotentialSpec.cos(), t)
    pos = schrodinger_oracle(n, PotentialSpec.cos(), basis="position")
    np.testing.assert_allclose(pos.conjugate_at(t), ref, atol=1e-11)
    spec = schrodinger_oracle(n, PotentialSpec.cos(), basis="spectral")
    # the spectral basis is a unitary change of basis, so norms agree
    assert np.linalg.norm(spec.conjugate_at(t), 2) == pytest.approx(np.linalg.norm(ref, 2), rel=1e-12)
    Q = spec.kinetic_eigenvectors
    np.testing.assert_allclose(Q @ spec.conjugate_at(t) @ Q.conj().T, ref, atol=1e-11)


def test_cache_read_only_and_keyed_by_time():
    o = schrodinger_oracle(8, PotentialSpec.cos())
    H = o.conjugate_at(0.25)
    assert o.conjugate_at(0.25) is H
    assert not H.flags.writeable
    o.populate([0.5, 0.5, 0.75])
    assert o.cache_size() == 3
    o.clear_cache()
    assert o.cache_size() == 0
    with pytest.raises(ValueError):
        o.conjugate_at(float("nan"))
    np.testing.assert_array_equal(o.evaluate(0.0), o.B)


def test_weighted_sum_matches_explicit_sum():
    o = schrodinger_oracle(10, PotentialSpec.cos())
    times = np.array([0.1, 0.4, 0.9])
    w = np.array([0.2, -0.5, 1.5])
    explicit = sum(wi * o.evaluate(ti) for ti, wi in zip(times, w))
    np.testing.assert_allclose(o.weighted_sum(times, w), explicit, atol=1e-13)


@pytest.mark.parametrize("basis", ["position", "spectral"])
def test_exact_step_matches_dense_expm(basis):
    n, t0, dt = 10, 0.3, 0.7
    g = Grid1D(n)
    A = build_kinetic(g).matrix
    B = build_potential(g, PotentialSpec.half_cos())
    ref = scipy.linalg.expm(1j * A * (t0 + dt)) @ scipy.linalg.expm(-1j * (A + B) * dt) @ scipy.linalg.expm(-1j * A * t0)
    o = schrodinger_oracle(n, PotentialSpec.half_cos(), basis=basis)
    U = o.exact_step(t0, dt)
    if basis == "spectral":
        Q = o.kinetic_eigenvectors
        U = Q @ U @ Q.conj().T
    np.testing.assert_allclose(U, ref, atol=1e-11)
    np.testing.assert_array_equal(o.exact_step(t0, 0.0), np.eye(n))
    with pytest.raises(ValueError):
        o.exact_step(t0, -0.1)


def test_from_matrices_and_scalar_potential_is_exact():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 5))
    A = X + X.T
    o = InteractionOracle.from_matrices(A, 3.0 * np.eye(5), basis="spectral")
    # a scalar potential is the same matrix in every basis, kept bit-exact
    np.testing.assert_array_equal(o.B, 3.0 * np.eye(5))
    H1, H2 = o.evaluate(0.3), o.evaluate(1.1)
    assert np.linalg.norm(H1 @ H2 - H2 @ H1) < 1e-13


# quadrature


def test_gauss_legendre_exact_for_polynomials():
    rule = gauss_legendre(5, 0.0, 2.0)
    # exact up to degree 9
    assert rule.integrate(lambda x: x**9) == pytest.approx(2.0**10 / 10, rel=1e-13)
    assert rule.weights.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        gauss_legendre(0)
    with pytest.raises(ValueError):
        gauss_legendre(3, 1.0, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_nested_simplex_volume_and_moment(n):
    h = 0.7
    sp = nested_simplex(n, [6] * n, 0.0, h)
    assert sp.weights.sum() == pytest.approx(h**n / math.factorial(n), rel=1e-12)
    # ordered: s_1 >= s_2 >= ... >= s_n
    assert np.all(np.diff(sp.points, axis=1) <= 0)


def test_nested_simplex_second_moment():
    # int_0^h int_0^{s1} s1 s2 ds2 ds1 = h^4 / 8
    h = 1.3
    sp = nested_simplex(2, [4, 4], 0.0, h)
    assert np.dot(sp.weights, sp.points[:, 0] * sp.points[:, 1]) == pytest.approx(h**4 / 8, rel=1e-12)


def test_triangular_simplex_is_ordered_subset():
    sp = triangular_simplex(2, 40, 0.0, 1.0)
    assert np.all(sp.points[:, 0] > sp.points[:, 1])
    assert sp.weights.sum() == pytest.approx(0.5, rel=5e-2)
