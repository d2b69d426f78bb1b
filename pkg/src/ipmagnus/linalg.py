"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and shape
``(dim, dim)``.  Every function here is pure; inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "HermitianEig",
    "SkewnessError",
    "antihermitian_norms",
    "as_matrix",
    "commutator",
    "expm_antihermitian",
    "herm_eig",
    "hermitian_norms",
    "is_anti_hermitian",
    "is_hermitian",
    "is_unitary",
    "matmul",
    "power_start_vector",
    "spectral_norm",
    "spectral_norms",
    "unitarity_defect",
]

POWER_RTOL = 1e-10
POWER_MAXITER = 5000


class DimensionError(ValueError):
    """Operands are not square or do not share a dimension."""


class SkewnessError(ValueError):
    """A generator handed to the exponential is not anti-Hermitian enough."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def as_matrix(X) -> np.ndarray:
    M = np.asarray(X, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
    return M


def _pair(X, Y):
    X, Y = as_matrix(X), as_matrix(Y)
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return X, Y


def is_hermitian(M, tol=1e-10) -> bool:
    M = as_matrix(M)
    return bool(np.linalg.norm(M - M.conj().T) <= tol)


def is_anti_hermitian(M, tol=1e-10) -> bool:
    M = as_matrix(M)
    return bool(np.linalg.norm(M + M.conj().T) <= tol)


def unitarity_defect(U) -> float:
    """Frobenius norm of ``U^H U - I``."""
    U = as_matrix(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def is_unitary(U, tol=1e-10) -> bool:
    return unitarity_defect(U) <= tol


def matmul(X, Y) -> np.ndarray:
    X, Y = _pair(X, Y)
    return X @ Y


def commutator(X, Y) -> np.ndarray:
    """Return ``XY - YX``."""
    X, Y = _pair(X, Y)
    return X @ Y - Y @ X


@dataclass(frozen=True)
class HermitianEig:
    """Eigenpairs of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.conj().T

    def apply_function(self, f) -> np.ndarray:
        """``Q diag(f(lambda)) Q^H``."""
        Q = self.eigenvectors
        return (Q * f(self.eigenvalues)) @ Q.conj().T


def herm_eig(M) -> HermitianEig:
    """Eigendecomposition of the Hermitian part ``(M + M^H)/2``.

    LAPACK's ``zheevd`` does the work; it is deterministic for identical
    input, which the harness relies on for reproducible output.
    """
    M = as_matrix(M)
    S = 0.5 * (M + M.conj().T)
    try:
        w, Q = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceError("Hermitian eigensolver returned non-finite eigenvalues")
    return HermitianEig(eigenvalues=w, eigenvectors=Q)


def expm_antihermitian(omega, tol_skew=None) -> np.ndarray:
    """Exponential of an (approximately) anti-Hermitian generator.

    The generator is projected onto the anti-Hermitian matrices before
    exponentiating, so the result is unitary to rounding.  ``tol_skew``
    bounds the Frobenius norm of ``omega + omega^H`` that is tolerated; it
    defaults to ``1e-8 * ||omega||_F``.
    """
    omega = as_matrix(omega)
    scale = np.linalg.norm(omega)
    if tol_skew is None:
        tol_skew = 1e-8 * scale
    skew = float(np.linalg.norm(omega + omega.conj().T))
    if skew > tol_skew:
        raise SkewnessError(
            f"generator is not anti-Hermitian: ||omega + omega^H||_F = {skew:.3e} > {tol_skew:.3e}"
        )
    if scale == 0.0:
        return np.eye(omega.shape[0], dtype=np.complex128)
    # omega = -i H_eff  ->  exp(omega) = exp(-i H_eff)
    eig = herm_eig(1j * omega)
    return eig.apply_function(lambda lam: np.exp(-1j * lam))


def power_start_vector(n: int) -> np.ndarray:
    """Deterministic start vector for power iteration.

    A linear ramp rather than the constant vector: the constant vector lies
    in the even sector of any reflection-symmetric problem (``V = cos x`` on
    a symmetric grid is one) and would miss an odd dominant singular vector.
    """
    v = 1.0 + np.arange(n, dtype=np.float64) / n
    return (v / np.linalg.norm(v)).astype(np.complex128)


def _fallback_norm(M):
    G = M.conj().T @ M
    w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return float(np.sqrt(max(w[-1], 0.0)))


def spectral_norm(M, method="exact", rtol=POWER_RTOL, maxiter=POWER_MAXITER) -> float:
    """Largest singular value of ``M``.

    ``method="exact"`` takes the singular values from LAPACK.
    ``method="power"`` runs power iteration on ``M^H M`` from
    :func:`power_start_vector`, stops once successive estimates agree to
    ``rtol`` and falls back to a full eigendecomposition of ``M^H M`` after
    ``maxiter`` iterations.  Power iteration stalls when the top singular
    values cluster, which nested commutators of ``H_I`` routinely do, so it
    is not the default.
    """
    M = as_matrix(M)
    if method == "exact":
        return float(np.linalg.svd(M, compute_uv=False)[0])
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    v = power_start_vector(M.shape[0])
    est = 0.0
    for _ in range(maxiter):
        w = M.conj().T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v is in the kernel; zero matrix, or a pathological start
            return 0.0 if not M.any() else _fallback_norm(M)
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - est) <= rtol * new:
            return float(np.linalg.norm(M @ v))
        est = new
    return _fallback_norm(M)


def _as_stack(stack):
    S = np.asarray(stack, dtype=np.complex128)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise DimensionError(f"expected a (k, n, n) stack, got shape {S.shape}")
    return S


def hermitian_norms(stack) -> np.ndarray:
    """Spectral norms ``max |eig|`` of a stack of exactly Hermitian matrices."""
    return np.abs(np.linalg.eigvalsh(_as_stack(stack))).max(axis=1)


def antihermitian_norms(stack, tol=1e-8) -> np.ndarray:
    """Spectral norms of a stack of (numerically) anti-Hermitian matrices.

    For normal matrices the singular values are the eigenvalue moduli, so
    the norm is ``max |eig(i C)|`` from the Hermitian eigensolver, which is
    cheaper than an SVD.  Members whose skew residual
    ``||C + C^H||_F`` exceeds ``tol * ||C||_F`` go through the SVD instead.
    """
    S = _as_stack(stack)
    SH = S.conj().transpose(0, 2, 1)
    K = 0.5j * (S - SH)
    out = np.abs(np.linalg.eigvalsh(K)).max(axis=1)
    skew = np.linalg.norm(S + SH, axis=(1, 2))
    bad = skew > tol * np.linalg.norm(S, axis=(1, 2))
    if bad.any():
        out[bad] = np.linalg.svd(S[bad], compute_uv=False)[:, 0]
    return out


def spectral_norms(stack, method="exact", rtol=POWER_RTOL, maxiter=POWER_MAXITER) -> np.ndarray:
    """:func:`spectral_norm` vectorised over a ``(k, n, n)`` stack.

    With ``method="power"`` each matrix follows exactly the iteration and
    stopping rule of the scalar routine; converged members leave the
    active set.
    """
    S = _as_stack(stack)
    if method == "exact":
        return np.linalg.svd(S, compute_uv=False)[:, 0]
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    k, n, _ = S.shape
    out = np.zeros(k)
    SH = S.conj().transpose(0, 2, 1)
    v = np.tile(power_start_vector(n), (k, 1))
    est = np.zeros(k)
    active = np.flatnonzero(np.abs(S).reshape(k, -1).max(axis=1) > 0.0)
    for _ in range(maxiter):
        if active.size == 0:
            return out
        va = v[active]
        w = (SH[active] @ (S[active] @ va[:, :, None]))[:, :, 0]
        nw = np.linalg.norm(w, axis=1)
        zero = nw == 0.0
        if zero.any():
            for idx in active[zero]:
                out[idx] = _fallback_norm(S[idx])
            active, w, nw = active[~zero], w[~zero], nw[~zero]
        new = np.sqrt(nw)
        v[active] = w / nw[:, None]
        done = np.abs(new - est[active]) <= rtol * new
        if done.any():
            idx = active[done]
            out[idx] = np.linalg.norm((S[idx] @ v[idx][:, :, None])[:, :, 0], axis=1)
        est[active] = new
        active = active[~done]
    for idx in active:
        out[idx] = _fallback_norm(S[idx])
    return out
