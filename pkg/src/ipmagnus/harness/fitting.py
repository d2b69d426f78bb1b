"""Least-squares slopes in log-log coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SlopeFit", "fit_loglog_slope", "fit_with_refit", "FLOOR", "REFIT_R2"]

FLOOR = 1e-14
REFIT_R2 = 0.995


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    excluded: tuple = field(default=())


def fit_loglog_slope(points, floor=FLOOR) -> SlopeFit:
    """Fit ``ln y = slope * ln x + intercept``.

    Points with ``y <= floor`` sit at the double-precision noise floor and
    are dropped; they are listed in ``SlopeFit.excluded``.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if any(x <= 0 for x, _ in pts):
        raise ValueError("abscissae must be positive")
    kept = [(x, y) for x, y in pts if y > floor]
    excluded = tuple((x, y) for x, y in pts if y <= floor)
    if len(kept) < 2:
        raise ValueError(f"need at least 2 points above {floor:g}, got {len(kept)}")
    lx = np.log([x for x, _ in kept])
    ly = np.log([y for _, y in kept])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), len(kept), excluded)


def fit_with_refit(points, floor=FLOOR, r2_threshold=REFIT_R2):
    """Full fit plus, if its r^2 is below ``r2_threshold``, a refit without the coarsest point.

    Returns ``(full, refit)``; ``refit`` is None when not triggered or when
    too few points remain.
    """
    full = fit_loglog_slope(points, floor)
    if full.r_squared >= r2_threshold:
        return full, None
    pts = sorted(points, key=lambda p: p[0])[:-1]
    try:
        return full, fit_loglog_slope(pts, floor)
    except ValueError:
        return full, None
