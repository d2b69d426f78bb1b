"""Self-checking verification suite.

Each check compares two routes to the same quantity that share as little
code as possible, and records the residual next to its threshold.  Failures
are report entries, never exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ipmagnus.commutators import left_normed_comm, pullout_rhs
from ipmagnus.discretize import InteractionOracle, PotentialSpec, schrodinger_oracle
from ipmagnus.linalg import spectral_norm, unitarity_defect
from ipmagnus.magnus import (
    MagnusStepConfig,
    compose_global,
    descent_count,
    magnus_coefficient,
    magnus_step,
    omega_n,
    omega_reference,
    permutation_coefficients,
    time_ordered_oracle,
)

__all__ = ["VerificationCheck", "run_verification_suite", "EXPECTED_COEFFICIENTS"]

# (-1)^d / (n * binom(n-1, d)), tabulated by hand
EXPECTED_COEFFICIENTS = {
    1: (Fraction(1),),
    2: (Fraction(1, 2), Fraction(-1, 2)),
    3: (Fraction(1, 3), Fraction(-1, 6), Fraction(1, 3)),
    4: (Fraction(1, 4), Fraction(-1, 12), Fraction(1, 12), Fraction(-1, 4)),
    5: (Fraction(1, 5), Fraction(-1, 20), Fraction(1, 30), Fraction(-1, 20), Fraction(1, 5)),
}
# permutations of 1..n with d descents
EULERIAN = {
    1: (1,),
    2: (1, 1),
    3: (1, 4, 1),
    4: (1, 11, 11, 1),
    5: (1, 26, 66, 26, 1),
}

PULLOUT_TRIALS = 50
PULLOUT_DIM = 8
PULLOUT_TOL = 1e-12
OMEGA2_TOL = 1e-10
OMEGA3_TOL = 1e-8
UNITARITY_TOL = 1e-9
ORACLE_RATIO = (3.5, 4.5)
ORACLE_AGREEMENT_TOL = 1e-7


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    residual: float
    threshold: str
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.name}: residual {self.residual:.3e}, required {self.threshold}"


def _random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


def pullout_residuals(seed, trials=PULLOUT_TRIALS, dim=PULLOUT_DIM):
    """Relative residuals of the pull-out identity on random Hermitian pairs.

    The residual is scaled by ``2^q ||B||^(q+1)``, the a priori bound on a
    q-layer commutator of conjugates of ``B``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        A = _random_hermitian(rng, dim)
        B = _random_hermitian(rng, dim)
        q = int(rng.integers(1, 5))
        taus = rng.uniform(-1.0, 1.0, size=q)
        t = float(rng.uniform(-1.0, 1.0))
        oracle = InteractionOracle.from_matrices(A, B)
        lhs = left_normed_comm(oracle, taus, innermost_t=t)
        rhs = pullout_rhs(oracle, taus, t)
        scale = 2.0**q * spectral_norm(B) ** (q + 1)
        out.append(spectral_norm(lhs - rhs) / scale)
    return out


def commuting_pair_residual(seed, dim=PULLOUT_DIM):
    """Largest commutator norm for a diagonal pair; exactly zero in floating point."""
    rng = np.random.default_rng(seed)
    A = np.diag(rng.standard_normal(dim))
    B = np.diag(rng.standard_normal(dim))
    oracle = InteractionOracle.from_matrices(A, B)
    worst = 0.0
    for q in range(1, 5):
        taus = rng.uniform(-1.0, 1.0, size=q)
        worst = max(worst, float(np.abs(left_normed_comm(oracle, taus)).max()))
    return worst


def coefficient_checks():
    checks = []
    worst = Fraction(0)
    for n, row in EXPECTED_COEFFICIENTS.items():
        for d, expected in enumerate(row):
            worst = max(worst, abs(magnus_coefficient(n, d).value - expected))
    checks.append(VerificationCheck("coefficient table n<=5", float(worst), "== 0 (exact rationals)", worst == 0))

    bad = 0
    for n, counts in EULERIAN.items():
        tally = [0] * n
        for perm, _ in permutation_coefficients(n):
            tally[descent_count(perm)] += 1
        bad += sum(abs(a - b) for a, b in zip(tally, counts))
    checks.append(VerificationCheck("descent counts match Eulerian numbers n<=5", float(bad), "== 0", bad == 0))

    # a constant generator has Omega_1 = -iHh and no higher terms
    off = Fraction(0)
    for n in range(1, 6):
        total = sum(c for _, c in permutation_coefficients(n))
        off = max(off, abs(total - (1 if n == 1 else 0)))
    checks.append(VerificationCheck(
        "coefficient sum is 1 for n=1 and 0 for n>=2", float(off), "== 0", off == 0,
    ))
    return checks


def omega_checks(n_points=16, quad_order=32, h=0.4, t_j=0.3):
    oracle = schrodinger_oracle(n_points, PotentialSpec.half_cos())
    checks = []
    for n, tol in ((2, OMEGA2_TOL), (3, OMEGA3_TOL)):
        interval = (t_j, t_j + h)
        perm = omega_n(oracle, interval, n, quad_order)
        ref = omega_reference(oracle, interval, n, quad_order)
        diff = spectral_norm(perm - ref)
        checks.append(VerificationCheck(
            f"Omega_{n} permutation sum vs commutator form (N={n_points}, M={quad_order})",
            diff, f"<= {tol:g}", diff <= tol,
        ))
    return checks


def unitarity_checks(n_points=16):
    oracle = schrodinger_oracle(n_points, PotentialSpec.half_cos())
    outputs = {
        "magnus_step p=1": magnus_step(oracle, 0.0, 0.4, MagnusStepConfig(1, (64,))),
        "magnus_step p=2": magnus_step(oracle, 0.2, 0.4, MagnusStepConfig(2, (64, 32))),
        "magnus_step p=3": magnus_step(oracle, 0.2, 0.4, MagnusStepConfig(3, (32, 16, 8))),
        "compose_global p=2": compose_global(oracle, 1.0, 4, MagnusStepConfig(2, (64, 32))),
        "exact_step": oracle.exact_step(0.3, 0.8),
        "time_ordered_oracle": time_ordered_oracle(oracle, 0.0, 0.4, 256),
    }
    return [
        VerificationCheck(f"unitarity {name}", unitarity_defect(U), f"<= {UNITARITY_TOL:g}",
                          unitarity_defect(U) <= UNITARITY_TOL)
        for name, U in outputs.items()
    ]


def time_ordered_checks(n_points=16, a=0.0, b=0.4, K=16, K_ref=8192):
    """Midpoint product converges at second order and agrees with the exact propagator."""
    oracle = schrodinger_oracle(n_points, PotentialSpec.half_cos())
    ref = time_ordered_oracle(oracle, a, b, K_ref)
    e1 = spectral_norm(time_ordered_oracle(oracle, a, b, K) - ref)
    e2 = spectral_norm(time_ordered_oracle(oracle, a, b, 2 * K) - ref)
    ratio = e1 / e2 if e2 > 0 else math.inf
    lo, hi = ORACLE_RATIO
    agree = spectral_norm(ref - oracle.exact_step(a, b - a))
    return [
        VerificationCheck(
            f"time-ordered oracle error ratio K={K} vs K={2 * K}", ratio,
            f"in [{lo}, {hi}]", lo <= ratio <= hi,
        ),
        VerificationCheck(
            f"time-ordered oracle K={K_ref} vs exact propagator", agree,
            f"<= {ORACLE_AGREEMENT_TOL:g}", agree <= ORACLE_AGREEMENT_TOL,
        ),
    ]


def run_verification_suite(seed: int = 0):
    """Run every check sequentially; returns a list of :class:`VerificationCheck`."""
    checks = []
    res = pullout_residuals(seed)
    worst = max(res)
    checks.append(VerificationCheck(
        f"pull-out identity, {len(res)} random {PULLOUT_DIM}x{PULLOUT_DIM} pairs, q<=4",
        worst, f"<= {PULLOUT_TOL:g}", worst <= PULLOUT_TOL,
    ))
    z = commuting_pair_residual(seed)
    checks.append(VerificationCheck("commuting diagonal pair, commutators q<=4", z, "== 0", z == 0.0))
    checks += coefficient_checks()
    checks += omega_checks()
    checks += unitarity_checks()
    checks += time_ordered_checks()
    return checks
