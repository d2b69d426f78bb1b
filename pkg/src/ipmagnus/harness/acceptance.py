"""Pass/fail thresholds applied to experiment rows.

Every check is a :class:`Check` with the measured quantity, the threshold
it was held to and the verdict.  The CLI turns any failed check into a
nonzero exit code; the acceptance tests print one line per check.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from ipmagnus.harness.fitting import fit_with_refit

__all__ = [
    "COMM_SLOPE_BANDS",
    "GLOBAL_SLOPE_BANDS",
    "LOCAL_SLOPE_BANDS",
    "Check",
    "check_degenerate",
    "check_monotone",
    "check_n_uniformity",
    "check_slopes",
    "check_unitarity",
    "evaluate_rows",
    "group_fits",
]

# reference slope +- tolerance, keyed by layer count or Magnus order
COMM_SLOPE_BANDS = {2: (1.6, 2.4), 3: (2.6, 3.4), 4: (3.5, 4.5)}
LOCAL_SLOPE_BANDS = {1: (2.7, 3.3), 2: (4.6, 5.4)}
GLOBAL_SLOPE_BANDS = {1: (1.7, 2.3), 2: (3.5, 4.5)}
SLOPE_BANDS = {
    "commscaling": COMM_SLOPE_BANDS,
    "magnus_local": LOCAL_SLOPE_BANDS,
    "magnus_global": GLOBAL_SLOPE_BANDS,
}

N_SPREAD_MAX = 0.10
MONOTONE_SLACK = 0.05
UNITARITY_MAX = 1e-9
DEGENERATE_COMM_MAX = 1e-12
DEGENERATE_ERROR_MAX = 1e-11


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    threshold: str
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.name}: measured {self.measured:.6g}, required {self.threshold}"


def _series(rows):
    """Rows grouped by curve: ``(param, N) -> [(x, value), ...]`` sorted by x."""
    out = defaultdict(list)
    for r in rows:
        out[(r.param, r.n_points)].append((r.x, r.value))
    return {k: sorted(v) for k, v in out.items()}


def group_fits(rows):
    """``{(param, N): (full_fit, refit_or_None)}`` for every curve with >= 2 points."""
    fits = {}
    for key, pts in _series(rows).items():
        try:
            fits[key] = fit_with_refit(pts)
        except ValueError:
            continue
    return fits


def _curve_name(experiment, param, n_points):
    tag = "layers" if experiment == "commscaling" else "p"
    return f"{experiment} {tag}={param} N={n_points}"


def check_slopes(rows, bands=None):
    """Fitted slope of every curve against its band.

    The refit (coarsest point dropped) is judged when the full fit's r^2
    triggered one; otherwise the full fit.
    """
    if not rows:
        return []
    experiment = rows[0].experiment
    bands = SLOPE_BANDS[experiment] if bands is None else bands
    checks = []
    for (param, n), (full, refit) in sorted(group_fits(rows).items()):
        if param not in bands:
            continue
        lo, hi = bands[param]
        fit = refit if refit is not None else full
        label = "refit slope" if refit is not None else "slope"
        checks.append(Check(
            f"{_curve_name(experiment, param, n)} {label}",
            fit.slope, f"in [{lo}, {hi}]", lo <= fit.slope <= hi,
        ))
    return checks


def check_n_uniformity(rows, max_spread=N_SPREAD_MAX):
    """Relative spread ``(max - min) / min`` across N at each ``(param, x)``."""
    by_x = defaultdict(list)
    for r in rows:
        by_x[(r.param, r.x)].append(r.value)
    checks = []
    for (param, x), vals in sorted(by_x.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
        if len(vals) < 2:
            continue
        lo, hi = min(vals), max(vals)
        spread = (hi - lo) / lo if lo > 0 else (0.0 if hi == 0 else float("inf"))
        checks.append(Check(
            f"N-uniformity layers={param} h={x:g}", spread, f"<= {max_spread}", spread <= max_spread,
        ))
    return checks


def check_monotone(rows, slack=MONOTONE_SLACK):
    """Values do not grow as ``x`` shrinks; ``slack`` is allowed at the largest ``x`` only."""
    checks = []
    for (param, n), pts in sorted(_series(rows).items()):
        pts = sorted(pts, reverse=True)
        worst = 0.0
        ok = True
        for i, ((_, big), (_, small)) in enumerate(zip(pts, pts[1:])):
            allowed = big * (1.0 + slack) if i == 0 else big
            if big > 0:
                worst = max(worst, small / big - 1.0)
            ok &= small <= allowed
        checks.append(Check(
            f"{_curve_name(rows[0].experiment, param, n)} monotone",
            worst, f"no growth as x shrinks ({slack:.0%} slack at the largest x)", ok,
        ))
    return checks


def check_degenerate(rows):
    """Analytically exact cases: every value must sit at rounding level."""
    if not rows:
        return []
    experiment = rows[0].experiment
    limit = DEGENERATE_COMM_MAX if experiment == "commscaling" else DEGENERATE_ERROR_MAX
    worst = max(r.value for r in rows)
    return [Check(f"{experiment} degenerate potential max value", worst, f"<= {limit:g}", worst <= limit)]


def check_unitarity(rows, limit=UNITARITY_MAX):
    defects = [v for r in rows for k, v in r.diagnostics.items() if k.startswith("unitarity")]
    if not defects:
        return []
    worst = max(defects)
    return [Check(f"{rows[0].experiment} unitarity defect", worst, f"<= {limit:g}", worst <= limit)]


def evaluate_rows(rows, degenerate=False):
    """All checks that apply to one experiment's rows.

    ``degenerate`` marks a zero or constant potential: slopes are meaningless
    there and the rows are instead held to the rounding-level bound.
    """
    if not rows:
        return []
    checks = check_unitarity(rows)
    if degenerate:
        return check_degenerate(rows) + checks
    checks = check_slopes(rows) + checks
    if rows[0].experiment == "commscaling":
        checks += check_n_uniformity(rows) + check_monotone(rows)
    return checks
