"""Truncated Magnus series for ``U' = -i H(t) U``.

Terms follow the permutation-sum representation

    Omega_n(b, a) = sum_{pi in S_n} C_{pi,n} int_{a <= s_n <= ... <= s_1 <= b}
                    A(s_pi(1)) ... A(s_pi(n)),        A(t) = -i H(t),

with ``C_{pi,n} = (-1)^d / (n * binom(n-1, d))`` and ``d`` the number of
descents of ``pi``.  :func:`omega_reference` evaluates the classical
nested-commutator forms of the first three terms independently.

Generators are anything with ``dim`` and ``conjugate_at(t)``; plain
callables ``t -> H(t)`` are wrapped by :func:`as_oracle`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ipmagnus.linalg import expm_antihermitian
from ipmagnus.quadrature import gauss_legendre, nested_simplex, triangular_simplex

__all__ = [
    "DEFAULT_WORK_BUDGET",
    "FunctionOracle",
    "MagnusCoefficient",
    "MagnusStepConfig",
    "WorkBudgetError",
    "as_oracle",
    "compose_global",
    "descent_count",
    "magnus_coefficient",
    "magnus_step",
    "omega_n",
    "omega_reference",
    "omega_work_estimate",
    "permutation_coefficients",
    "time_ordered_oracle",
]

DEFAULT_WORK_BUDGET = 5e11


class WorkBudgetError(RuntimeError):
    def __init__(self, estimate, budget):
        super().__init__(
            f"estimated cost {estimate:.3e} multiply-adds exceeds the work budget {budget:.3e}"
        )
        self.estimate = estimate
        self.budget = budget


def descent_count(perm) -> int:
    """Number of positions ``i`` with ``perm[i] > perm[i+1]``."""
    perm = tuple(perm)
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise ValueError(f"{perm!r} is not a permutation of 1..{len(perm)}")
    return sum(1 for x, y in zip(perm, perm[1:]) if x > y)


@dataclass(frozen=True)
class MagnusCoefficient:
    n: int
    descents: int
    value: Fraction


def magnus_coefficient(n: int, d: int) -> MagnusCoefficient:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= d <= n - 1:
        raise ValueError(f"descent count {d} out of range [0, {n - 1}]")
    value = Fraction((-1) ** d, n * math.comb(n - 1, d))
    return MagnusCoefficient(n, d, value)


@lru_cache(maxsize=None)
def permutation_coefficients(n: int):
    """``((perm, C_{perm,n}), ...)`` over ``S_n`` in lexicographic order; perms are 1-based."""
    out = []
    for perm in itertools.permutations(range(1, n + 1)):
        out.append((perm, magnus_coefficient(n, descent_count(perm)).value))
    return tuple(out)


class FunctionOracle:
    """Adapter giving a callable ``t -> H(t)`` the oracle interface, with a cache."""

    def __init__(self, func, dim=None):
        self.func = func
        self._cache = {}
        self.dim = dim if dim is not None else np.asarray(func(0.0)).shape[0]

    def conjugate_at(self, t):
        t = float(t)
        hit = self._cache.get(t)
        if hit is None:
            hit = np.array(self.func(t), dtype=np.complex128)
            hit.setflags(write=False)
            hit = self._cache.setdefault(t, hit)
        return hit

    __call__ = conjugate_at

    def evaluate(self, t):
        return np.asarray(self.func(float(t)), dtype=np.complex128)


def as_oracle(H):
    return H if hasattr(H, "conjugate_at") else FunctionOracle(H)


def _uncached(oracle):
    return getattr(oracle, "evaluate", oracle.conjugate_at)


def _weighted_sum(oracle, times, weights):
    ws = getattr(oracle, "weighted_sum", None)
    if ws is not None:
        return ws(times, weights)
    acc = np.zeros((oracle.dim, oracle.dim), dtype=np.complex128)
    evaluate = _uncached(oracle)
    for t, w in zip(times, weights):
        acc += w * evaluate(t)
    return acc


def _orders(quad_order, n):
    if isinstance(quad_order, (int, np.integer)):
        return [int(quad_order)] * n
    orders = [int(m) for m in quad_order]
    if len(orders) < n or min(orders) < 1:
        raise ValueError(f"need {n} positive quadrature orders, got {quad_order!r}")
    return orders


def omega_work_estimate(n, quad_order, dim) -> float:
    """Multiply-add count of :func:`omega_n` with the nested scheme."""
    orders = _orders(quad_order, n)
    outer = math.prod(orders[: n - 1])
    words = math.factorial(n) * max(n - 1, 1) * dim**3
    inner = orders[n - 1] * dim**2 * (2 if n > 1 else 1)
    return float(outer * (words + inner))


def omega_n(oracle, interval, n, quad_order, scheme="nested", work_budget=DEFAULT_WORK_BUDGET):
    """Magnus term ``Omega_n`` over ``interval = (a, b)`` by simplex quadrature.

    The innermost variable ``s_n`` enters every permuted product linearly, so
    it is integrated first (``S(s_{n-1}) = sum_j w_j A(s_{n,j})``) and the
    permutation sum runs over the remaining ``n - 1`` levels of the nested
    rule.  ``quad_order`` is a single order or one per level.  ``scheme``
    selects ``"nested"`` Gauss-Legendre or the ``"triangular"`` filtered
    tensor grid.
    """
    a, b = map(float, interval)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not b > a:
        raise ValueError(f"empty interval ({a}, {b})")
    oracle = as_oracle(oracle)
    orders = _orders(quad_order, n)
    est = omega_work_estimate(n, orders, oracle.dim)
    if est > work_budget:
        raise WorkBudgetError(est, work_budget)

    if scheme == "nested":
        if n == 1:
            rule = gauss_legendre(orders[0], a, b)
            return -1j * _weighted_sum(oracle, rule.nodes, rule.weights)
        outer = nested_simplex(n - 1, orders, a, b)
        ref_x, ref_w = np.polynomial.legendre.leggauss(orders[n - 1])

        def inner_rule(upper):
            half = 0.5 * (upper - a)
            return 0.5 * (upper + a) + half * ref_x, half * ref_w

    elif scheme == "triangular":
        rule = gauss_legendre(orders[0], a, b)
        if n == 1:
            return -1j * _weighted_sum(oracle, rule.nodes, rule.weights)
        outer = triangular_simplex(n - 1, orders[0], a, b)

        def inner_rule(upper):
            keep = rule.nodes < upper
            return rule.nodes[keep], rule.weights[keep]

    else:
        raise ValueError(f"unknown simplex scheme {scheme!r}")

    coeffs = [(tuple(p - 1 for p in perm), complex(float(c))) for perm, c in permutation_coefficients(n)]
    # A(t) = -i H(t); the product of n factors carries (-i)^n
    phase = (-1j) ** n
    # quadrature nodes are not experiment labels: memoise per call instead of
    # growing the oracle cache
    evaluate = _uncached(oracle)
    memo = {}

    def H(s):
        hit = memo.get(s)
        if hit is None:
            hit = memo[s] = evaluate(s)
        return hit

    total = np.zeros((oracle.dim, oracle.dim), dtype=np.complex128)
    for point, weight in zip(outer.points, outer.weights):
        times, wts = inner_rule(point[-1])
        if times.size == 0:
            continue
        live = set(point)
        for key in [k for k in memo if k not in live]:
            del memo[key]
        factors = [H(s) for s in point]
        factors.append(_weighted_sum(oracle, times, wts))
        acc = np.zeros_like(total)
        for perm, c in coeffs:
            word = factors[perm[0]]
            for k in perm[1:]:
                word = word @ factors[k]
            acc += c * word
        total += weight * acc
    return phase * total


def omega_reference(oracle, interval, n, quad_order):
    """Nested-commutator forms of ``Omega_1..Omega_3`` by direct quadrature.

    ``Omega_2 = 1/2 int [A1, A2]`` and
    ``Omega_3 = 1/6 int ([A1, [A2, A3]] + [A3, [A2, A1]])`` over
    ``a <= t_3 <= t_2 <= t_1 <= b``, each integrand sampled pointwise.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"reference forms exist for n = 1, 2, 3; got {n}")
    a, b = map(float, interval)
    oracle = as_oracle(oracle)
    if n == 1:
        return omega_n(oracle, interval, 1, quad_order)
    orders = _orders(quad_order, n)
    simplex = nested_simplex(n, orders, a, b)
    evaluate = _uncached(oracle)
    A = lambda t: -1j * evaluate(t)  # noqa: E731
    total = np.zeros((oracle.dim, oracle.dim), dtype=np.complex128)
    block = orders[n - 1]
    pts, wts = simplex.points, simplex.weights
    for start in range(0, len(wts), block):
        p = pts[start : start + block]
        w = wts[start : start + block]
        A1 = A(p[0, 0])
        A2 = np.stack([A(s) for s in p[:, 1]]) if n == 2 else A(p[0, 1])
        if n == 2:
            comm = A1 @ A2 - A2 @ A1
            total += 0.5 * np.tensordot(w, comm, axes=1)
            continue
        A3 = np.stack([A(s) for s in p[:, 2]])
        c23 = A2 @ A3 - A3 @ A2
        c21 = A2 @ A1 - A1 @ A2
        term = (A1 @ c23 - c23 @ A1) + (A3 @ c21 - c21 @ A3)
        total += np.tensordot(w, term, axes=1) / 6.0
    return total


@dataclass(frozen=True)
class MagnusStepConfig:
    """Order ``p`` and Gauss-Legendre orders ``quad_orders[n-1]`` for ``Omega_n``."""

    order: int
    quad_orders: tuple = (512, 256)
    scheme: str = "nested"
    work_budget: float = DEFAULT_WORK_BUDGET

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"Magnus order must be >= 1, got {self.order}")
        qo = tuple(int(m) for m in self.quad_orders)
        if len(qo) < self.order:
            raise ValueError(
                f"order {self.order} needs {self.order} quadrature orders, got {len(qo)}"
            )
        if min(qo) < 1:
            raise ValueError(f"quadrature orders must be positive, got {qo}")
        object.__setattr__(self, "quad_orders", qo)


def magnus_generator(oracle, t_j, h, config: MagnusStepConfig):
    """``Omega_(p)(t_j + h, t_j) = sum_{n<=p} Omega_n``."""
    interval = (t_j, t_j + h)
    total = None
    for n in range(1, config.order + 1):
        term = omega_n(
            oracle, interval, n, config.quad_orders[n - 1],
            scheme=config.scheme, work_budget=config.work_budget,
        )
        total = term if total is None else total + term
    return total


def magnus_step(oracle, t_j, h, config: MagnusStepConfig):
    """Per-step Magnus unitary ``exp(Omega_(p)(t_j + h, t_j))``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    return expm_antihermitian(magnus_generator(oracle, t_j, h, config))


def compose_global(oracle, T, L, config: MagnusStepConfig):
    """Product of ``L`` Magnus steps on ``[0, T]``, later steps on the left."""
    if int(L) != L or L < 1:
        raise ValueError(f"number of steps must be a positive integer, got {L!r}")
    h = T / L
    U = None
    for k in range(int(L)):
        step = magnus_step(oracle, k * h, h, config)
        U = step if U is None else step @ U
    return U


def time_ordered_oracle(H, a, b, K):
    """Midpoint product ``prod_{k=K-1..0} exp(-i H(m_k) (b-a)/K)``.

    Second-order accurate brute-force reference for the time-ordered
    exponential; shares no code with the Magnus path beyond the matrix
    exponential.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K!r}")
    K = int(K)
    evaluate = _uncached(as_oracle(H))
    delta = (b - a) / K
    U = None
    for k in range(K):
        mid = a + (k + 0.5) * delta
        step = expm_antihermitian(-1j * delta * np.asarray(evaluate(mid)))
        U = step if U is None else step @ U
    return U
