import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmagnus.harness.fitting import fit_loglog_slope, fit_with_refit


def test_exact_cubic():
    fit = fit_loglog_slope([(h, h**3) for h in (1.0, 0.5, 0.25)])
    assert fit.slope == pytest.approx(3.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points_used == 3


def test_one_point_is_an_error():
    with pytest.raises(ValueError):
        fit_loglog_slope([(1.0, 1.0)])


def test_non_positive_abscissa_is_an_error():
    with pytest.raises(ValueError):
        fit_loglog_slope([(0.0, 1.0), (1.0, 2.0)])


def test_floor_excludes_and_reports():
    fit = fit_loglog_slope([(1.0, 1.0), (0.5, 0.25), (0.25, 1e-16)])
    assert fit.points_used == 2
    assert fit.excluded == ((0.25, 1e-16),)
    assert fit.slope == pytest.approx(2.0)
    with pytest.raises(ValueError):
        fit_loglog_slope([(1.0, 0.0), (0.5, 0.0)])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_noisy_power_law(seed):
    rng = np.random.default_rng(seed)
    xs = 2.0 ** -np.arange(6)
    ys = 7 * xs**2.5 * (1 + rng.uniform(-1e-3, 1e-3, xs.size))
    fit = fit_loglog_slope(zip(xs, ys))
    assert 2.49 <= fit.slope <= 2.51
    assert 0.0 <= fit.r_squared <= 1.0


def test_refit_drops_coarsest_point():
    xs = [1.0, 0.5, 0.25, 0.125]
    ys = [1.0, 0.5**4, 0.25**4, 0.125**4]  # the x=1 point is off the h^4 line
    ys[0] = 1e-1
    full, refit = fit_with_refit(list(zip(xs, ys)))
    assert full.r_squared < 0.995
    assert refit.points_used == 3
    assert refit.slope == pytest.approx(4.0)
    clean, none = fit_with_refit([(x, x**2) for x in xs])
    assert none is None and clean.slope == pytest.approx(2.0)
