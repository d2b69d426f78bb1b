import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmagnus.commutators import (
    Leaf,
    Node,
    all_bracketings,
    eval_commutator_tree,
    layers,
    left_normed_comm,
    left_normed_tree,
    n_bracketings,
    pullout_rhs,
)
from ipmagnus.discretize import InteractionOracle, PotentialSpec, schrodinger_oracle
from ipmagnus.harness.experiments import _max_all_trees, max_left_normed_norm


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_pullout_identity(seed, q):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(rng, 6), random_hermitian(rng, 6)
    o = InteractionOracle.from_matrices(A, B)
    taus = rng.uniform(-1, 1, q)
    t = float(rng.uniform(-1, 1))
    lhs = left_normed_comm(o, taus, innermost_t=t)
    rhs = pullout_rhs(o, taus, t)
    scale = 2.0**q * np.linalg.norm(B, 2) ** (q + 1)
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-12 * scale


def test_bracketing_counts_are_catalan():
    assert [n_bracketings(g) for g in range(1, 7)] == [1, 1, 2, 5, 14, 42]
    trees = all_bracketings((0.1, 0.2, 0.3))
    assert len(set(trees)) == 2
    assert all(t.grade == 3 and layers(t) == 2 for t in trees)


def test_left_normed_tree_matches_direct_comm():
    o = schrodinger_oracle(8, PotentialSpec.cos())
    labels = (0.0, 0.3, 0.1, 0.7)
    tree = left_normed_tree(labels)
    assert tree == Node(Leaf(0.7), Node(Leaf(0.1), Node(Leaf(0.3), Leaf(0.0))))
    np.testing.assert_allclose(eval_commutator_tree(o, tree, {}), left_normed_comm(o, labels[1:]), atol=1e-14)


def _brute_max(Hs, n_layers):
    best = 0.0
    for tup in itertools.product(range(len(Hs)), repeat=n_layers + 1):
        C = Hs[tup[0]]
        for i in tup[1:]:
            C = Hs[i] @ C - C @ Hs[i]
        best = max(best, np.linalg.norm(C, 2))
    return best


@pytest.mark.parametrize("n_layers", [1, 2, 3])
def test_max_left_normed_matches_brute_force(n_layers):
    o = schrodinger_oracle(10, PotentialSpec.cos())
    Hs = np.stack([o.conjugate_at(t) for t in (0.5, 0.25, 0.125, 0.0625)])
    assert max_left_normed_norm(Hs, n_layers) == pytest.approx(_brute_max(Hs, n_layers), rel=1e-12)


def test_max_left_normed_random_hermitian():
    rng = np.random.default_rng(5)
    Hs = np.stack([random_hermitian(rng, 5) for _ in range(3)])
    assert max_left_normed_norm(Hs, 3) == pytest.approx(_brute_max(Hs, 3), rel=1e-12)
    assert max_left_normed_norm(Hs, 0) == pytest.approx(max(np.linalg.norm(H, 2) for H in Hs), rel=1e-12)


def test_all_trees_dominates_left_normed():
    o = schrodinger_oracle(8, PotentialSpec.cos())
    labels = (0.5, 0.25, 0.125)
    Hs = np.stack([o.conjugate_at(t) for t in labels])
    assert _max_all_trees(o, labels, 3) >= max_left_normed_norm(Hs, 2) * (1 - 1e-12)


def test_commuting_pair_gives_exact_zero():
    rng = np.random.default_rng(1)
    o = InteractionOracle.from_matrices(np.diag(rng.standard_normal(6)), np.diag(rng.standard_normal(6)))
    for q in range(1, 5):
        assert not left_normed_comm(o, rng.uniform(-1, 1, q)).any()
