"""Gauss-Legendre rules and quadrature over ordered time simplices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureRule",
    "SimplexPoints",
    "gauss_legendre",
    "nested_simplex",
    "triangular_simplex",
]


@lru_cache(maxsize=64)
def _reference_rule(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_legendre(m: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """``m``-point Gauss-Legendre rule mapped affinely to ``[a, b]``."""
    if int(m) != m or m < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {m!r}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    x, w = _reference_rule(int(m))
    half = 0.5 * (b - a)
    return QuadratureRule(int(m), 0.5 * (a + b) + half * x, half * w, float(a), float(b))


@dataclass(frozen=True)
class SimplexPoints:
    """Quadrature points on ``a <= s_n <= ... <= s_1 <= b``.

    ``points[i]`` is ``(s_1, ..., s_n)`` and ``weights[i]`` its weight.
    """

    points: np.ndarray
    weights: np.ndarray


def nested_simplex(n: int, orders, a: float, b: float) -> SimplexPoints:
    """Nested Gauss-Legendre rule: ``s_1`` on ``[a, b]``, ``s_{k+1}`` on ``[a, s_k]``.

    ``orders`` is an int (same order on every level) or one order per level.
    """
    if isinstance(orders, (int, np.integer)):
        orders = [int(orders)] * n
    if len(orders) < n:
        raise ValueError(f"need {n} quadrature orders, got {len(orders)}")
    outer = gauss_legendre(orders[0], a, b)
    pts = outer.nodes[:, None]
    wts = outer.weights.copy()
    for level in range(1, n):
        x, w = _reference_rule(int(orders[level]))
        upper = pts[:, -1]
        half = 0.5 * (upper - a)
        new = (0.5 * (upper + a))[:, None] + half[:, None] * x[None, :]
        pts = np.concatenate(
            [np.repeat(pts, len(x), axis=0), new.reshape(-1, 1)], axis=1
        )
        wts = (wts[:, None] * half[:, None] * w[None, :]).reshape(-1)
    return SimplexPoints(pts, wts)


def triangular_simplex(n: int, order: int, a: float, b: float) -> SimplexPoints:
    """Tensor Gauss-Legendre grid restricted to strictly decreasing tuples.

    This is the lower-triangular filtering of a product rule.  It converges
    slowly because the simplex boundary cuts through the grid; use
    :func:`nested_simplex` unless reproducing that scheme is the point.
    """
    rule = gauss_legendre(order, a, b)
    idx = np.stack(np.meshgrid(*[np.arange(order)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    nodes = rule.nodes[idx]
    keep = np.all(np.diff(nodes, axis=1) < 0, axis=1) if n > 1 else np.ones(len(idx), bool)
    return SimplexPoints(nodes[keep], np.prod(rule.weights[idx[keep]], axis=1))
