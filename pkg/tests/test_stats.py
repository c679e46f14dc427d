import math

import numpy as np
import pytest

from daxt.errors import ContractViolation
from daxt.stats import (
    f_survival,
    fraction_within,
    kolmogorov_survival,
    ks_two_sample,
    levene_median,
    log_gamma,
    mae,
    norm_quantile,
    pearson,
    qq_data,
    regularized_incomplete_beta,
    t_two_sided,
    validation_report,
)


def _ecdf_distance(first, second):
    support = sorted(set(first) | set(second))
    worst = 0.0
    for point in support:
        left = sum(value <= point for value in first) / len(first)
        right = sum(value <= point for value in second) / len(second)
        worst = max(worst, abs(left - right))
    return worst


def test_mae_small_example():
    assert mae([1.0, 2.0, 3.0], [1.0, 2.0, 4.0]) == pytest.approx(1.0 / 3.0)


def test_mae_rejects_mismatched_or_non_finite_input():
    with pytest.raises(ContractViolation):
        mae([1.0, 2.0], [1.0])
    with pytest.raises(ContractViolation):
        mae([], [])
    with pytest.raises(ContractViolation):
        mae([1.0, float("nan")], [1.0, 2.0])


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 7.0, 30.0, 171.5])
def test_log_gamma_matches_math(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)


def test_incomplete_beta_closed_forms():
    # I_x(1, 1) = x and I_x(a, 1) = x^a
    assert regularized_incomplete_beta(1.0, 1.0, 0.3) == pytest.approx(0.3, abs=1e-14)
    assert regularized_incomplete_beta(3.0, 1.0, 0.6) == pytest.approx(0.6**3, abs=1e-13)
    assert regularized_incomplete_beta(2.0, 5.0, 0.0) == 0.0
    assert regularized_incomplete_beta(2.0, 5.0, 1.0) == 1.0


def test_tail_probabilities_match_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    for statistic, dfn, dfd in [(0.5, 1, 10), (2.3, 1, 400), (4.1, 3, 27), (11.0, 2, 500)]:
        assert f_survival(statistic, dfn, dfd) == pytest.approx(scipy_stats.f.sf(statistic, dfn, dfd), abs=1e-10)
    for statistic, df in [(0.1, 3), (1.96, 30), (-2.5, 100), (4.0, 998)]:
        assert t_two_sided(statistic, df) == pytest.approx(2.0 * scipy_stats.t.sf(abs(statistic), df), abs=1e-10)


@pytest.mark.parametrize("p", [1e-6, 0.01, 0.02425, 0.3, 0.5, 0.8, 0.99, 1 - 1e-7])
def test_norm_quantile_matches_scipy(p):
    scipy_stats = pytest.importorskip("scipy.stats")
    assert norm_quantile(p) == pytest.approx(scipy_stats.norm.ppf(p), abs=1e-9)


def test_norm_quantile_is_antisymmetric():
    for p in (0.001, 0.1, 0.37):
        assert norm_quantile(p) == pytest.approx(-norm_quantile(1.0 - p), abs=1e-9)
    assert norm_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ContractViolation):
        norm_quantile(0.0)


def test_levene_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(0)
    first = rng.normal(0.0, 1.0, 80)
    second = rng.normal(0.5, 1.6, 35)
    result = levene_median(first, second)
    statistic, p_value = scipy_stats.levene(first, second, center="median")

    assert result.statistic == pytest.approx(statistic, rel=1e-10)
    assert result.p_value == pytest.approx(p_value, abs=1e-10)
    assert result.sizes == (80, 35)


def test_levene_ignores_group_shifts():
    rng = np.random.default_rng(1)
    first = rng.normal(0.0, 1.0, 40)
    second = rng.normal(0.0, 2.0, 40)
    base = levene_median(first, second)
    shifted = levene_median(first + 10.0, second - 3.0)
    assert shifted.statistic == pytest.approx(base.statistic, rel=1e-9)


def test_levene_needs_spread():
    with pytest.raises(ContractViolation):
        levene_median([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(ContractViolation):
        levene_median([1.0, 2.0, 3.0])


def test_ks_distance_matches_brute_force_ecdf():
    rng = np.random.default_rng(2)
    first = np.round(rng.normal(0.0, 1.0, 50), 1)
    second = np.round(rng.normal(0.3, 1.0, 30), 1)
    result = ks_two_sample(first, second)

    assert result.statistic == pytest.approx(_ecdf_distance(first.tolist(), second.tolist()), abs=1e-15)
    assert result.sizes == (50, 30)
    assert 0.0 <= result.p_value <= 1.0


def test_ks_statistic_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(3)
    first = rng.normal(0.0, 1.0, 200)
    second = rng.standard_t(3, 150)
    assert ks_two_sample(first, second).statistic == pytest.approx(scipy_stats.ks_2samp(first, second).statistic)


def test_ks_identical_and_disjoint_samples():
    same = ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert same.statistic == 0.0 and same.p_value == 1.0

    apart = ks_two_sample(np.arange(100.0), np.arange(100.0) + 1000.0)
    assert apart.statistic == 1.0
    assert apart.p_value < 1e-10


def test_ks_is_invariant_under_monotone_maps():
    rng = np.random.default_rng(4)
    first = rng.uniform(0.1, 2.0, 60)
    second = rng.uniform(0.5, 3.0, 45)
    assert ks_two_sample(np.log(first), np.log(second)).statistic == ks_two_sample(first, second).statistic


def test_kolmogorov_survival_limits():
    assert kolmogorov_survival(0.0) == 1.0
    assert kolmogorov_survival(0.19) == 1.0
    assert kolmogorov_survival(1.36) == pytest.approx(0.0494, abs=5e-4)
    assert kolmogorov_survival(3.0) < 1e-7


def test_pearson_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(5)
    x = rng.normal(size=120)
    y = 0.2 * x + rng.normal(size=120)
    result = pearson(x, y)
    expected = scipy_stats.pearsonr(x, y)

    assert result.statistic == pytest.approx(expected[0], abs=1e-12)
    assert result.p_value == pytest.approx(expected[1], abs=1e-10)


def test_pearson_affine_behaviour():
    rng = np.random.default_rng(6)
    x = rng.normal(size=30)
    y = x + rng.normal(size=30)
    base = pearson(x, y).statistic

    assert pearson(3.0 * x + 1.0, y).statistic == pytest.approx(base, abs=1e-12)
    assert pearson(-x, y).statistic == pytest.approx(-base, abs=1e-12)
    perfect = pearson(x, 2.0 * x - 5.0)
    assert perfect.statistic == pytest.approx(1.0) and perfect.p_value == pytest.approx(0.0, abs=1e-12)


def test_pearson_rejects_degenerate_input():
    with pytest.raises(ContractViolation):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ContractViolation):
        pearson([1.0, 2.0], [1.0, 2.0])


def test_qq_data_is_standardized_and_ordered():
    rng = np.random.default_rng(7)
    pairs = qq_data(rng.normal(3.0, 2.0, 51))
    theoretical = [pair[0] for pair in pairs]
    observed = [pair[1] for pair in pairs]

    assert len(pairs) == 51
    assert theoretical == sorted(theoretical)
    assert observed == sorted(observed)
    assert theoretical[25] == pytest.approx(0.0, abs=1e-12)
    assert np.mean(observed) == pytest.approx(0.0, abs=1e-12)
    assert np.std(observed) == pytest.approx(1.0, abs=1e-12)


def test_fraction_within_bound():
    assert fraction_within([0.01, -0.05, 0.2, -0.3], 0.05) == 0.5


def test_validation_report_collects_the_battery():
    rng = np.random.default_rng(8)
    actuals = rng.normal(0.0, 0.05, 40)
    predictions = actuals + rng.normal(0.0, 0.01, 40)
    train_residuals = rng.normal(0.0, 0.01, 160)
    report = validation_report(train_residuals, actuals - predictions, predictions, actuals)

    assert [test.name for test in report.tests] == ["levene", "ks", "pearson"]
    assert report.mae < report.baseline_mae
    assert len(report.qq) == 40
    assert report.within_bound == 0.05
    assert 0.0 <= report.within_fraction <= 1.0


def _erf_series(x, terms=80):
    total = 0.0
    term = x
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -x * x / (n + 1)
    return 2.0 / math.sqrt(math.pi) * total


def _quantile_by_bisection(p):
    low, high = -6.0, 6.0
    for _ in range(100):
        middle = 0.5 * (low + high)
        if 0.5 * (1.0 + _erf_series(middle / math.sqrt(2.0))) < p:
            low = middle
        else:
            high = middle
    return 0.5 * (low + high)


@pytest.mark.parametrize("p", [0.025, 0.5, 0.975])
def test_norm_quantile_matches_series_bisection(p):
    assert norm_quantile(p) == pytest.approx(_quantile_by_bisection(p), abs=1e-6)
