"""Time-labelled nested commutators of ``H_I(t) = B_t = e^{iAt} B e^{-iAt}``.

A grade-``g`` commutator has ``g`` time-labelled occurrences of ``B`` and
``g - 1`` commutator layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

__all__ = [
    "Leaf",
    "Node",
    "all_bracketings",
    "eval_commutator_tree",
    "left_normed_comm",
    "layers",
    "left_normed_tree",
    "n_bracketings",
    "pullout_rhs",
]


def left_normed_comm(oracle, s_list, innermost_t=0.0):
    """``[B_{s_k}, ... [B_{s_2}, [B_{s_1}, B_{innermost_t}]] ...]``.

    With ``innermost_t = 0`` this is ``Comm_{k+1}(s_1, ..., s_k)``.
    """
    C = np.array(oracle.conjugate_at(innermost_t))
    for s in s_list:
        Bs = oracle.conjugate_at(s)
        C = Bs @ C - C @ Bs
    return C


def pullout_rhs(oracle, taus, t):
    """``e^{iAt} Comm_{q+1}(tau_1 - t, ..., tau_q - t) e^{-iAt}``.

    Equals ``left_normed_comm(oracle, taus, innermost_t=t)`` for any
    Hermitian ``A`` and ``B``; evaluating both sides checks the identity.
    """
    inner = left_normed_comm(oracle, [tau - t for tau in taus], 0.0)
    U = oracle.kinetic_propagator(t)
    return U @ inner @ U.conj().T


@dataclass(frozen=True)
class Leaf:
    time_label: float

    @property
    def grade(self) -> int:
        return 1


@dataclass(frozen=True)
class Node:
    left: "Tree"
    right: "Tree"

    @property
    def grade(self) -> int:
        return self.left.grade + self.right.grade


Tree = Union[Leaf, Node]


def layers(tree: Tree) -> int:
    return tree.grade - 1


def eval_commutator_tree(oracle, tree: Tree, _memo=None):
    """Leaves evaluate to ``H_I(tau)``, nodes to the commutator of their children."""
    if isinstance(tree, Leaf):
        return oracle.conjugate_at(tree.time_label)
    if _memo is not None and tree in _memo:
        return _memo[tree]
    X = eval_commutator_tree(oracle, tree.left, _memo)
    Y = eval_commutator_tree(oracle, tree.right, _memo)
    out = X @ Y - Y @ X
    if _memo is not None:
        _memo[tree] = out
    return out


def left_normed_tree(labels) -> Tree:
    """``[H(labels[-1]), [..., [H(labels[1]), H(labels[0])]]]``."""
    tree = Leaf(float(labels[0]))
    for s in labels[1:]:
        tree = Node(Leaf(float(s)), tree)
    return tree


@lru_cache(maxsize=None)
def _shapes(g):
    """Full binary tree shapes with ``g`` ordered leaves, as nested tuples of leaf indices."""
    if g == 1:
        return ((),)
    out = []
    for k in range(1, g):
        for left in _shapes(k):
            for right in _shapes(g - k):
                out.append((k, left, right))
    return tuple(out)


def _build(shape, labels):
    if shape == ():
        return Leaf(float(labels[0]))
    k, left, right = shape
    return Node(_build(left, labels[:k]), _build(right, labels[k:]))


def all_bracketings(labels):
    """Every bracketing of the ordered label sequence (Catalan many)."""
    return [_build(shape, tuple(labels)) for shape in _shapes(len(labels))]


def n_bracketings(g: int) -> int:
    return len(_shapes(g))
