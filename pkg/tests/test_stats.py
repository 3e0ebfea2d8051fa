import math
from dataclasses import replace
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import special

from fittsbench.errors import CollinearInputError, ContractError, InsufficientDataError, InvalidArgumentError
from fittsbench.metrics import TrialMetric
from fittsbench.stats import (
    anova_regression,
    ballistic_fit,
    betainc,
    compare_fits,
    f_sf,
    fitts_fit,
    index_of_difficulty,
    lack_of_fit,
    ols_fit,
    remove_outliers,
    t_sf_two_sided,
)
from fittsbench.stats.simulate import simulate_mt
from oracles import F_GRID, f_sf_quad

finite = st.floats(-1e3, 1e3, allow_nan=False)


def trials_from(d, mt, source="human", w=0.02):
    return [TrialMetric(f"t{i}", source, float(di), w, float(m), True) for i, (di, m) in enumerate(zip(d, mt))]


# index of difficulty -----------------------------------------------------

def test_id_zero_bits():
    assert index_of_difficulty(0.01, 0.02) == 0.0


@pytest.mark.parametrize("d, n", [(0.20, 20), (0.50, 50)])
def test_id_high_precision(d, n):
    with mpmath.workdps(40):
        expected = float(mpmath.log(n, 2))
    assert index_of_difficulty(d, 0.02) == pytest.approx(expected, abs=1e-14)


def test_id_rounded_values():
    assert index_of_difficulty(0.2, 0.02) == pytest.approx(4.321928, abs=1e-6)
    assert index_of_difficulty(0.5, 0.02) == pytest.approx(5.643856, abs=1e-6)


@pytest.mark.parametrize("d, w", [(0.0, 0.02), (0.2, 0.0), (-0.1, 0.02)])
def test_id_domain(d, w):
    with pytest.raises(InvalidArgumentError):
        index_of_difficulty(d, w)


@given(st.integers(-20, 20), st.floats(1e-3, 1.0))
def test_id_doubling_law(k, w):
    # powers of two keep 2D/W exact, so the law holds bit for bit
    d = w * 2.0 ** k
    assert index_of_difficulty(2 * d, w) == index_of_difficulty(d, w) + 1


# ordinary least squares ---------------------------------------------------

def test_exact_line():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    fit = ols_fit(x, 2 + 3 * x)
    assert fit.intercept == pytest.approx(2, abs=1e-12)
    assert fit.slope == pytest.approx(3, abs=1e-12)
    assert fit.r_squared == pytest.approx(1, abs=1e-12)


def test_constant_response():
    fit = ols_fit([1, 2, 3, 4], [5, 5, 5, 5])
    assert fit.slope == 0.0
    assert fit.r_squared == 0.0


def test_five_point_hand_solution():
    x = [Fraction(v) for v in (1, 2, 3, 4, 5)]
    y = [Fraction(v) for v in (2, 4, 5, 4, 5)]
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    b = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    a = (sy - b * sx) / n
    assert (a, b) == (Fraction(11, 5), Fraction(3, 5))
    fit = ols_fit([float(v) for v in x], [float(v) for v in y])
    assert fit.intercept == pytest.approx(float(a), abs=1e-12)
    assert fit.slope == pytest.approx(float(b), abs=1e-12)
    sse = sum((yi - a - b * xi) ** 2 for xi, yi in zip(x, y))
    assert fit.sse == pytest.approx(float(sse), abs=1e-12)
    assert fit.se_slope == pytest.approx(math.sqrt(float(sse) / 3 / 10), abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(CollinearInputError):
        ols_fit([2, 2, 2], [1, 2, 3])
    with pytest.raises(InsufficientDataError):
        ols_fit([1, 2], [1, 2])


xy = st.integers(3, 40).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                                                    st.lists(finite, min_size=n, max_size=n)))


@settings(max_examples=80)
@given(xy)
def test_residual_orthogonality(data):
    x, y = map(np.array, data)
    assume(np.ptp(x) > 1e-3)
    fit = ols_fit(x, y)
    scale = max(1.0, np.abs(y).max()) * len(x)
    assert abs(fit.residuals.sum()) <= 1e-9 * scale
    assert abs(fit.residuals @ (x - x.mean())) <= 1e-9 * scale * max(1.0, np.abs(x).max())


@settings(max_examples=80)
@given(xy)
def test_r2_is_squared_correlation(data):
    x, y = map(np.array, data)
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    fit = ols_fit(x, y)
    assert fit.r_squared == pytest.approx(np.corrcoef(x, y)[0, 1] ** 2, abs=1e-10)


@settings(max_examples=80)
@given(xy)
def test_f_equals_t_squared(data):
    x, y = map(np.array, data)
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    fit = ols_fit(x, y)
    anova = anova_regression(fit)
    assume(math.isfinite(anova.F) and fit.se_slope > 0)
    t = fit.slope / fit.se_slope
    assert anova.F == pytest.approx(t * t, rel=1e-8)


# ANOVA and F tail -------------------------------------------------------------

def test_anova_flat_data():
    a = anova_regression(ols_fit([1, 2, 3, 4], [3, 3, 3, 3]))
    assert (a.F, a.df1, a.df2, a.p) == (0.0, 1, 2, 1.0)


def test_anova_noiseless_line():
    a = anova_regression(ols_fit([1, 2, 3, 4], [1, 3, 5, 7]))
    assert a.F == math.inf and a.p == 0.0


def test_anova_ten_points_against_quadrature():
    rng = np.random.default_rng(4)
    x = np.arange(10.0)
    y = 1 + 0.3 * x + rng.normal(0, 1, 10)
    a = anova_regression(ols_fit(x, y))
    assert (a.df1, a.df2) == (1, 8)
    assert a.p == pytest.approx(f_sf_quad(a.F, 1, 8), abs=1e-8)


@pytest.mark.parametrize("f, d1, d2", F_GRID)
def test_f_tail_matches_quadrature(f, d1, d2):
    assert f_sf(f, d1, d2) == pytest.approx(f_sf_quad(f, d1, d2), abs=1e-8)


@settings(max_examples=200)
@given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
def test_betainc_against_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(float(special.betainc(a, b, x)), abs=1e-10)


def test_t_tail():
    assert t_sf_two_sided(0.0, 5) == pytest.approx(1.0)
    assert t_sf_two_sided(2.570581836, 5) == pytest.approx(0.05, abs=1e-8)


# lack of fit --------------------------------------------------------------------

def test_lof_means_on_line():
    x = np.repeat([1.0, 2.0, 3.0, 4.0], 3)
    noise = np.tile([-0.1, 0.0, 0.1], 4)
    lof = lack_of_fit(ols_fit(x, 1 + 2 * x + noise))
    assert lof.F == 0.0 and lof.p == 1.0
    assert (lof.df_lof, lof.df_pe) == (2, 8)


@settings(max_examples=80)
@given(st.integers(3, 6), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_sse_decomposition(levels, reps, seed):
    rng = np.random.default_rng(seed)
    x = np.repeat(rng.uniform(0, 10, levels), reps)
    assume(len(np.unique(np.round(x, 12))) == levels)
    y = rng.normal(0, 3, len(x)) + rng.uniform(-5, 5) * x ** 2
    fit = ols_fit(x, y)
    lof = lack_of_fit(fit)
    assert lof.ss_pe + lof.ss_lof == pytest.approx(fit.sse, abs=1e-9 * max(1.0, fit.sst))


def test_lof_not_applicable():
    assert lack_of_fit(ols_fit([1, 2, 3, 4], [1, 3, 2, 5])) is None  # no replicates
    assert lack_of_fit(ols_fit([1, 1, 2, 2], [1, 2, 3, 4])) is None  # two levels


def test_lof_rejects_curvature():
    rng = np.random.default_rng(0)
    d, mt = simulate_mt("ballistic", 0.2, 0.5, (0.05, 0.1, 0.2, 0.3, 0.4, 0.5), 0.02, 25, 0.01, rng)
    fit = fitts_fit(trials_from(d, mt))
    assert fit.lack_of_fit.p < 0.05


# model fits ---------------------------------------------------------------------

def test_ballistic_data_prefers_ballistic_model():
    d, mt = simulate_mt("ballistic", 0.2, 0.5, (0.05, 0.1, 0.2, 0.3, 0.4, 0.5), 0.02, 5, 0.0,
                        np.random.default_rng(0))
    trials = trials_from(d, mt)
    assert ballistic_fit(trials).r_squared > fitts_fit(trials).r_squared
    assert ballistic_fit(trials).r_squared == pytest.approx(1.0)


def test_failed_trials_excluded():
    d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4), 0.02, 4, 0.0, np.random.default_rng(0))
    trials = trials_from(d, mt) + [TrialMetric("f", "human", 0.5, 0.02, None, False)]
    fit = fitts_fit(trials)
    assert fit.n == 12
    assert fit.anova.df2 == 10


def test_fit_invariants():
    d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4, 0.5), 0.02, 10, 0.05, np.random.default_rng(1))
    fit = fitts_fit(trials_from(d, mt))
    assert 0 <= fit.r_squared <= 1
    assert fit.anova.df1 == 1 and fit.anova.df2 == fit.n - 2
    assert 0 <= fit.anova.p <= 1
    assert (fit.lack_of_fit.df_lof, fit.lack_of_fit.df_pe) == (2, fit.n - 4)


# outliers ---------------------------------------------------------------------------

def test_outliers_all_equal():
    trials = trials_from([0.2] * 10, [0.8] * 10)
    kept, removed = remove_outliers(trials)
    assert removed == [] and kept == trials


def test_outliers_far_point():
    trials = trials_from([0.2] * 25, [1.0] * 24 + [10.0])
    kept, removed = remove_outliers(trials)
    assert [t.movement_time_s for t in removed] == [10.0]
    assert len(kept) == 24


def test_small_groups_pass_through():
    trials = trials_from([0.2] * 3, [1.0, 1.0, 50.0])
    assert remove_outliers(trials)[1] == []


def test_injected_timeouts_removed():
    rng = np.random.default_rng(5)
    d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4, 0.5), 0.02, 25, 0.01, rng)
    trials = trials_from(d, mt)
    inject = rng.choice(len(trials), 5, replace=False)
    for i in inject:
        trials[i] = replace(trials[i], trial_id=f"inj{i}", movement_time_s=5.0)
    kept, removed = remove_outliers(trials)
    assert {t.trial_id for t in removed} == {f"inj{i}" for i in inject}


# comparison -------------------------------------------------------------------------

def _fit(seed, n=25):
    d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4, 0.5), 0.02, n, 0.05, np.random.default_rng(seed))
    return fitts_fit(trials_from(d, mt))


def test_identical_fits():
    f = _fit(0)
    c = compare_fits(f, f)
    assert c.slope_diff == 0.0 and c.p_equal_slopes == 1.0 and c.delta_r_squared == 0.0


def test_model_mismatch():
    d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4), 0.02, 4, 0.05, np.random.default_rng(0))
    with pytest.raises(ContractError):
        compare_fits(fitts_fit(trials_from(d, mt)), ballistic_fit(trials_from(d, mt)))


def test_r2_gap_reported():
    f = _fit(0)
    c = compare_fits(replace(f, r_squared=0.741), replace(f, r_squared=0.596))
    assert c.delta_r_squared == pytest.approx(0.145, abs=1e-12)


def test_disjoint_halves_agree():
    within = 0
    for seed in range(100):
        rng = np.random.default_rng([seed, 1])
        d, mt = simulate_mt("fitts", 0.2, 0.15, (0.2, 0.3, 0.4, 0.5), 0.02, 24, 0.05, rng)
        idx = rng.permutation(len(d))
        half = len(d) // 2
        a = fitts_fit(trials_from(d[idx[:half]], mt[idx[:half]]))
        b = fitts_fit(trials_from(d[idx[half:]], mt[idx[half:]]))
        c = compare_fits(a, b)
        within += abs(c.slope_diff) <= 2 * c.slope_diff_se
    assert within >= 90
