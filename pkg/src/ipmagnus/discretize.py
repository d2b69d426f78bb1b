"""Periodic 1D discretisation of ``H = -Laplacian/2 + V(x)`` on ``[-pi, pi)``.

The kinetic part is the second-order central difference Laplacian, a
circulant matrix diagonalised by the unitary DFT.  :class:`InteractionOracle`
evaluates the interaction-picture generator ``H_I(t) = e^{iAt} B e^{-iAt}``
through that spectrum and never calls a generic matrix exponential for ``A``.

Two representations are supported.  ``basis="position"`` returns grid-space
matrices.  ``basis="spectral"`` returns the same operators written in the
eigenbasis of ``A`` (Fourier modes for the finite-difference kinetic term),
where ``e^{iAt}`` is diagonal and conjugation is an elementwise phase.
Norms, spectra and products are basis independent, so experiments run in the
spectral basis.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ipmagnus.linalg import as_matrix, herm_eig

__all__ = [
    "Grid1D",
    "InteractionOracle",
    "KineticOperator",
    "PotentialSpec",
    "build_kinetic",
    "build_potential",
    "conjugate_at",
    "dft_matrix",
    "exact_step",
    "schrodinger_oracle",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid ``x_j = -pi + j dx`` with ``dx = 2 pi / N``."""

    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n_points!r}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return -np.pi + self.spacing * np.arange(self.n_points)


_KINDS = ("cos", "halfcos", "zero", "constant", "samples")


@dataclass(frozen=True)
class PotentialSpec:
    """Real potential ``V(x)`` sampled on the grid.

    ``kind`` is one of ``cos``, ``halfcos`` (``0.5 cos x``), ``zero``,
    ``constant`` (uses ``value``) or ``samples`` (uses ``samples``).
    """

    kind: str
    value: float = 0.0
    samples: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "constant" and np.iscomplexobj(self.value):
            raise ValueError("potential must be real")
        if self.kind == "samples":
            arr = np.asarray(self.samples)
            if np.iscomplexobj(arr) and np.any(arr.imag != 0):
                raise ValueError("potential samples must be real")

    @classmethod
    def cos(cls):
        return cls("cos")

    @classmethod
    def half_cos(cls):
        return cls("halfcos")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, c: float):
        return cls("constant", value=float(c))

    @classmethod
    def from_samples(cls, values):
        arr = np.asarray(values)
        if np.iscomplexobj(arr) and np.any(arr.imag != 0):
            raise ValueError("potential samples must be real")
        return cls("samples", samples=tuple(float(v) for v in np.real(arr)))

    @classmethod
    def parse(cls, text: str):
        """Parse ``cos``, ``halfcos``, ``zero`` or ``constant:<c>``."""
        text = text.strip().lower()
        if text.startswith("constant"):
            _, _, c = text.partition(":")
            try:
                return cls.constant(float(c))
            except ValueError:
                raise ValueError(f"bad constant potential {text!r}; use constant:<value>") from None
        if text in ("cos", "halfcos", "zero"):
            return cls(text)
        raise ValueError(f"unknown potential {text!r}")

    def label(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.value!r}"
        return self.kind

    def values(self, grid: Grid1D) -> np.ndarray:
        x = grid.nodes
        if self.kind == "cos":
            return np.cos(x)
        if self.kind == "halfcos":
            return 0.5 * np.cos(x)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.shape != (grid.n_points,):
            raise ValueError(
                f"potential has {arr.size} samples but the grid has {grid.n_points} points"
            )
        return arr.copy()


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT, ``F[j, k] = exp(-2 pi i jk / n) / sqrt(n)``."""
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(-2j * np.pi * jk / n) / np.sqrt(n)


@dataclass(frozen=True)
class KineticOperator:
    """``A = -Laplacian/2`` with its closed-form circulant spectrum.

    ``matrix == fourier @ diag(eigenvalues) @ fourier^H``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    fourier: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_kinetic(grid: Grid1D) -> KineticOperator:
    n = grid.n_points
    if n < 3:
        raise ValueError(f"the three-point stencil needs N >= 3, got {n}")
    inv = 1.0 / grid.spacing**2
    A = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n)
    A[idx, idx] = inv
    A[idx, (idx + 1) % n] = -0.5 * inv
    A[idx, (idx - 1) % n] = -0.5 * inv
    lam = (1.0 - np.cos(2.0 * np.pi * idx / n)) * inv
    for arr in (A, lam):
        arr.setflags(write=False)
    F = dft_matrix(n)
    F.setflags(write=False)
    return KineticOperator(matrix=A, eigenvalues=lam, fourier=F)


def build_potential(grid: Grid1D, spec: PotentialSpec) -> np.ndarray:
    """Diagonal potential matrix ``diag(V(x_j))``."""
    return np.diag(spec.values(grid)).astype(np.complex128)


def _frozen(M):
    M = np.array(M, dtype=np.complex128)
    M.setflags(write=False)
    return M


def _is_scalar(M):
    d = np.diagonal(M)
    return bool(np.all(d == d[0]) and np.count_nonzero(M - np.diag(d)) == 0)


@dataclass(eq=False)
class InteractionOracle:
    """Time-keyed evaluator of ``H_I(t) = e^{iAt} B e^{-iAt}``.

    ``A`` is described by its eigenvalues and unitary eigenvectors, ``B`` by
    a Hermitian matrix in the position representation.  Evaluations are
    cached under the exact float value of ``t``; cached arrays are
    read-only and insertion is guarded by a lock, so the oracle may be
    shared between threads.
    """

    kinetic_eigenvalues: np.ndarray
    kinetic_eigenvectors: np.ndarray
    potential_matrix: np.ndarray
    basis: str = "position"
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _full_eig: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.basis not in ("position", "spectral"):
            raise ValueError(f"basis must be 'position' or 'spectral', got {self.basis!r}")
        self.kinetic_eigenvalues = np.asarray(self.kinetic_eigenvalues, dtype=np.float64)
        self.kinetic_eigenvectors = _frozen(self.kinetic_eigenvectors)
        self.potential_matrix = _frozen(self.potential_matrix)
        Q = self.kinetic_eigenvectors
        B = self.potential_matrix
        if _is_scalar(B):
            # c I is invariant under any unitary change of basis; keeping it
            # exact lets commutators of constant potentials vanish exactly
            self._b_hat = B
        else:
            # B written in the eigenbasis of A
            self._b_hat = _frozen(Q.conj().T @ B @ Q)

    @classmethod
    def from_kinetic(cls, kinetic: KineticOperator, potential, basis="position"):
        return cls(kinetic.eigenvalues, kinetic.fourier, as_matrix(potential), basis=basis)

    @classmethod
    def from_matrices(cls, A, B, basis="position"):
        """Oracle for arbitrary Hermitian ``A`` and ``B``."""
        eig = herm_eig(A)
        return cls(eig.eigenvalues, eig.eigenvectors, as_matrix(B), basis=basis)

    @property
    def dim(self) -> int:
        return self.potential_matrix.shape[0]

    @property
    def B(self) -> np.ndarray:
        """The potential in this oracle's basis."""
        return self.potential_matrix if self.basis == "position" else self._b_hat

    def to_basis(self, M_spectral):
        if self.basis == "spectral":
            return M_spectral
        Q = self.kinetic_eigenvectors
        return Q @ M_spectral @ Q.conj().T

    def kinetic_phases(self, t: float) -> np.ndarray:
        """Diagonal of ``e^{iAt}`` in the eigenbasis of ``A``."""
        return np.exp(1j * self.kinetic_eigenvalues * t)

    def kinetic_propagator(self, t: float) -> np.ndarray:
        """``e^{iAt}`` as a matrix in this oracle's basis."""
        return self.to_basis(np.diag(self.kinetic_phases(t)))

    def _evaluate(self, t):
        if t == 0.0:
            return self.B
        d = self.kinetic_phases(t)
        return self.to_basis(d[:, None] * self._b_hat * d.conj()[None, :])

    def evaluate(self, t: float) -> np.ndarray:
        """``H_I(t)`` computed afresh, bypassing the cache."""
        return np.array(self._evaluate(float(t)), dtype=np.complex128)

    def conjugate_at(self, t: float) -> np.ndarray:
        """``H_I(t)``; read-only, cached by exact ``t``."""
        t = float(t)
        if not np.isfinite(t):
            raise ValueError(f"time label must be finite, got {t}")
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        value = _frozen(self._evaluate(t))
        with self._lock:
            return self._cache.setdefault(t, value)

    __call__ = conjugate_at

    def populate(self, times) -> None:
        for t in sorted(set(float(t) for t in times)):
            self.conjugate_at(t)

    def cache_size(self) -> int:
        return len(self._cache)

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()

    def weighted_sum(self, times, weights) -> np.ndarray:
        """``sum_j w_j H_I(t_j)`` without forming the individual terms.

        In the eigenbasis of ``A`` the sum is ``B_hat * G`` elementwise with
        ``G = P diag(w) P^H`` and ``P[k, j] = exp(i lambda_k t_j)``, a single
        matrix product.
        """
        times = np.asarray(times, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        P = np.exp(1j * np.outer(self.kinetic_eigenvalues, times))
        G = (P * weights) @ P.conj().T
        return self.to_basis(self._b_hat * G)

    def full_hamiltonian_eig(self):
        if self._full_eig is None:
            H = np.diag(self.kinetic_eigenvalues).astype(np.complex128) + self._b_hat
            self._full_eig = herm_eig(H)
        return self._full_eig

    def exact_step(self, t0: float, dt: float) -> np.ndarray:
        """Interaction-picture propagator ``e^{iA(t0+dt)} e^{-i(A+B)dt} e^{-iA t0}``."""
        if dt < 0:
            raise ValueError(f"dt must be non-negative, got {dt}")
        n = self.dim
        if dt == 0:
            return np.eye(n, dtype=np.complex128)
        eig = self.full_hamiltonian_eig()
        middle = eig.apply_function(lambda lam: np.exp(-1j * lam * dt))
        left = self.kinetic_phases(t0 + dt)
        right = self.kinetic_phases(-t0)
        return self.to_basis(left[:, None] * middle * right[None, :])


def schrodinger_oracle(n_points: int, potential: PotentialSpec, basis="spectral") -> InteractionOracle:
    """Interaction-picture oracle for the finite-difference model on ``N`` points."""
    grid = Grid1D(n_points)
    kin = build_kinetic(grid)
    return InteractionOracle.from_kinetic(kin, build_potential(grid, potential), basis=basis)


def conjugate_at(oracle: InteractionOracle, t: float) -> np.ndarray:
    return oracle.conjugate_at(t)


def exact_step(oracle: InteractionOracle, t0: float, dt: float) -> np.ndarray:
    return oracle.exact_step(t0, dt)
