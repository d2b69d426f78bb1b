"""Experiment drivers: commutator scaling, Magnus local error, global error.

Each experiment is a list of independent cells, one per ``(h, N)`` or
``(p, dt)`` pair.  Cells run on a bounded thread pool; rows come back in
configuration order whatever the completion order, and every cell is a
deterministic function of its inputs, so output does not depend on the
number of workers.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ipmagnus.commutators import all_bracketings, eval_commutator_tree, n_bracketings
from ipmagnus.discretize import PotentialSpec, schrodinger_oracle
from ipmagnus.linalg import hermitian_norms, spectral_norm, unitarity_defect
from ipmagnus.magnus import (
    DEFAULT_WORK_BUDGET,
    MagnusStepConfig,
    WorkBudgetError,
    compose_global,
    magnus_step,
)

__all__ = [
    "CommScalingConfig",
    "GlobalErrorConfig",
    "LocalErrorConfig",
    "ResultRow",
    "max_left_normed_norm",
    "run_comm_scaling",
    "run_global_error",
    "run_local_error",
]

DEFAULT_H_VALUES = tuple(2.0**-k for k in range(6))
DEFAULT_LABEL_DIVISORS = (1, 2, 4, 8, 16, 32, 64)
TREE_BUDGET = 100_000


@dataclass(frozen=True)
class ResultRow:
    """One measured cell.

    ``param`` is the layer count (commutator study) or the Magnus order;
    ``x`` is ``h`` or ``dt``.  ``seconds`` is wall time, or None when timings
    are not recorded.  ``diagnostics`` carries side measurements such as
    unitarity defects and never reaches the CSV.
    """

    experiment: str
    param: int
    n_points: int
    x: float
    value: float
    seconds: float | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"measured value must be finite and non-negative, got {self.value}")


def _run_cells(fn, cells, workers):
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


# --- nested commutator scaling ------------------------------------------------


@dataclass(frozen=True)
class CommScalingConfig:
    """Commutator-norm sweep.

    ``layers`` counts commutator layers, so each commutator has
    ``layers + 1`` time labels.  For each ``h`` the labels are
    ``h / d`` for ``d`` in ``label_divisors``.
    """

    layers: int = 3
    grid_sizes: tuple = (64, 128)
    h_values: tuple = DEFAULT_H_VALUES
    label_divisors: tuple = DEFAULT_LABEL_DIVISORS
    potential: PotentialSpec = PotentialSpec.cos()
    bracketing: str = "left-normed"
    tree_budget: int = TREE_BUDGET
    workers: int = 1
    record_timings: bool = False

    def __post_init__(self):
        if self.layers not in (2, 3, 4):
            raise ValueError(f"layers must be in 2..4, got {self.layers}")
        if self.bracketing not in ("left-normed", "all-trees"):
            raise ValueError(f"bracketing must be 'left-normed' or 'all-trees', got {self.bracketing!r}")
        if not self.grid_sizes or min(self.grid_sizes) < 3:
            raise ValueError(f"grid sizes must be >= 3, got {self.grid_sizes}")
        if not self.h_values or any(not 0 < h <= 1 for h in self.h_values):
            raise ValueError(f"h values must lie in (0, 1], got {self.h_values}")
        if not self.label_divisors or any(d < 1 for d in self.label_divisors):
            raise ValueError(f"label divisors must be >= 1, got {self.label_divisors}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def grade(self) -> int:
        return self.layers + 1

    def labels(self, h):
        return tuple(h / d for d in self.label_divisors)

    def tree_count(self) -> int:
        tuples = len(self.label_divisors) ** self.grade
        if self.bracketing == "left-normed":
            return tuples
        return tuples * n_bracketings(self.grade)


def max_left_normed_norm(Hs, layers):
    """Max spectral norm of ``[H_{k}, ... [H_{j}, H_{i}]]`` over all label tuples.

    ``Hs`` is the stack of generator values at the labels.  The depth-first
    walk evaluates each inner commutator once and reuses it for every outer
    label.

    Nested commutators of Hermitian matrices alternate between Hermitian and
    anti-Hermitian (``C^H = eps C``), so ``[H, C] = HC - eps (HC)^H`` costs one
    product.  At the last layer the bound ``||X||_2 <= sqrt(||X||_1 ||X||_inf)``
    screens out children that cannot beat the running maximum; survivors get
    an exact norm, so the result is still the exact maximum.
    """
    Hs = np.asarray(Hs)
    Hs = 0.5 * (Hs + Hs.conj().transpose(0, 2, 1))
    if layers == 0:
        return float(hermitian_norms(Hs).max())
    best = 0.0

    def walk(C, eps, depth):
        nonlocal best
        if not C.any():
            return  # exact zero propagates to every enclosing commutator
        P = Hs @ C
        children = P - eps * P.conj().transpose(0, 2, 1)
        if depth < layers:
            for child in children:
                walk(child, -eps, depth + 1)
            return
        mags = np.abs(children)
        bound = np.sqrt(mags.sum(axis=1).max(axis=1) * mags.sum(axis=2).max(axis=1))
        live = bound * (1.0 + 1e-12) > best
        if live.any():
            # children satisfy X^H = -eps X
            X = children[live] if eps < 0 else 1j * children[live]
            best = max(best, float(hermitian_norms(X).max()))

    for H in Hs:
        walk(H, 1.0, 1)
    return best


def _max_all_trees(oracle, labels, grade):
    memo = {}
    best = 0.0
    for tup in itertools.product(labels, repeat=grade):
        for tree in all_bracketings(tup):
            C = eval_commutator_tree(oracle, tree, memo)
            best = max(best, spectral_norm(C))
    return best


def run_comm_scaling(cfg: CommScalingConfig):
    if cfg.tree_count() > cfg.tree_budget:
        raise WorkBudgetError(cfg.tree_count(), cfg.tree_budget)
    oracles = {N: schrodinger_oracle(N, cfg.potential, basis="spectral") for N in cfg.grid_sizes}
    cells = [(h, N) for N in cfg.grid_sizes for h in cfg.h_values]
    # populate every label before any concurrent reads
    for h, N in cells:
        oracles[N].populate(cfg.labels(h))

    def cell(hN):
        h, N = hN
        oracle = oracles[N]
        labels = cfg.labels(h)
        if cfg.bracketing == "left-normed":
            Hs = np.stack([oracle.conjugate_at(t) for t in labels])
            value, secs = _timed(max_left_normed_norm, Hs, cfg.layers)
        else:
            value, secs = _timed(_max_all_trees, oracle, labels, cfg.grade)
        return ResultRow(
            "commscaling", cfg.layers, N, h, value,
            secs if cfg.record_timings else None,
        )

    return _run_cells(cell, cells, cfg.workers)


# --- Magnus local and global error -------------------------------------------


@dataclass(frozen=True)
class LocalErrorConfig:
    orders: tuple = (1, 2)
    n_points: int = 128
    dt_values: tuple = (0.8, 0.4, 0.2, 0.1)
    quad_orders: tuple = (512, 256)
    potential: PotentialSpec = PotentialSpec.half_cos()
    t_j: float = 0.0
    scheme: str = "nested"
    work_budget: float = DEFAULT_WORK_BUDGET
    workers: int = 1
    record_timings: bool = False

    def __post_init__(self):
        if not self.orders or min(self.orders) < 1:
            raise ValueError(f"Magnus orders must be >= 1, got {self.orders}")
        if len(self.quad_orders) < max(self.orders):
            raise ValueError(
                f"order {max(self.orders)} needs {max(self.orders)} quadrature orders, "
                f"got {self.quad_orders}"
            )
        if self.n_points < 3:
            raise ValueError(f"N must be >= 3, got {self.n_points}")
        dts = list(self.dt_values)
        if not dts or any(dt <= 0 for dt in dts) or any(a <= b for a, b in zip(dts, dts[1:])):
            raise ValueError(f"dt values must be positive and strictly decreasing, got {self.dt_values}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def step_config(self, p):
        return MagnusStepConfig(p, self.quad_orders, self.scheme, self.work_budget)


def _local_cell(oracle, cfg, p, t_j, dt):
    U = magnus_step(oracle, t_j, dt, cfg.step_config(p))
    E = oracle.exact_step(t_j, dt)
    diag = {"unitarity_magnus": unitarity_defect(U), "unitarity_exact": unitarity_defect(E)}
    return spectral_norm(U - E), diag


def run_local_error(cfg: LocalErrorConfig):
    """Single-step error ``||U_p(dt) - U_exact(dt)||_2`` on ``[t_j, t_j + dt]``."""
    oracle = schrodinger_oracle(cfg.n_points, cfg.potential, basis="spectral")
    oracle.full_hamiltonian_eig()
    cells = [(p, dt) for p in cfg.orders for dt in cfg.dt_values]

    def cell(pdt):
        p, dt = pdt
        (err, diag), secs = _timed(_local_cell, oracle, cfg, p, cfg.t_j, dt)
        return ResultRow(
            "magnus_local", p, cfg.n_points, dt, err,
            secs if cfg.record_timings else None, diag,
        )

    return _run_cells(cell, cells, cfg.workers)


@dataclass(frozen=True)
class GlobalErrorConfig:
    T: float = 1.0
    L_values: tuple = (4, 8, 16, 32)
    orders: tuple = (1, 2)
    n_points: int = 64
    quad_orders: tuple = (512, 256)
    potential: PotentialSpec = PotentialSpec.half_cos()
    scheme: str = "nested"
    work_budget: float = DEFAULT_WORK_BUDGET
    workers: int = 1
    record_timings: bool = False

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.L_values or any(int(L) != L or L < 1 for L in self.L_values):
            raise ValueError(f"step counts must be positive integers, got {self.L_values}")
        if not self.orders or min(self.orders) < 1:
            raise ValueError(f"Magnus orders must be >= 1, got {self.orders}")
        if len(self.quad_orders) < max(self.orders):
            raise ValueError(
                f"order {max(self.orders)} needs {max(self.orders)} quadrature orders, "
                f"got {self.quad_orders}"
            )
        if self.n_points < 3:
            raise ValueError(f"N must be >= 3, got {self.n_points}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def step_config(self, p):
        return MagnusStepConfig(p, self.quad_orders, self.scheme, self.work_budget)


def run_global_error(cfg: GlobalErrorConfig):
    """Global error ``||U_p(T, 0) - U(T, 0)||_2`` with ``L`` steps of ``h = T / L``."""
    oracle = schrodinger_oracle(cfg.n_points, cfg.potential, basis="spectral")
    exact = oracle.exact_step(0.0, cfg.T)
    cells = [(p, L) for p in cfg.orders for L in cfg.L_values]

    def measure(p, L):
        U = compose_global(oracle, cfg.T, int(L), cfg.step_config(p))
        diag = {"unitarity_magnus": unitarity_defect(U), "unitarity_exact": unitarity_defect(exact)}
        return spectral_norm(U - exact), diag

    def cell(pL):
        p, L = pL
        (err, diag), secs = _timed(measure, p, L)
        diag["L"] = int(L)
        return ResultRow(
            "magnus_global", p, cfg.n_points, cfg.T / L, err,
            secs if cfg.record_timings else None, diag,
        )

    return _run_cells(cell, cells, cfg.workers)
