"""Statistical battery used to validate the trained model.

Everything here is self-contained: the F and t tail probabilities come from a
continued-fraction regularized incomplete beta function and a Lanczos
log-gamma, and the normal quantile from a rational approximation refined by
one Halley step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from daxt.errors import ContractViolation

_LANCZOS_G = 7.0
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    n: int
    sizes: Tuple[int, ...] = field(default=())

    __test__ = False  # keep pytest from collecting this class


def _vector(values: Sequence[float], name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise ContractViolation(f"{name} contains non-finite values")
    return array


def mae(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    predicted = _vector(predictions, "predictions")
    actual = _vector(actuals, "actuals")
    if predicted.size == 0 or predicted.size != actual.size:
        raise ContractViolation(f"mae needs equal non-zero lengths, got {predicted.size} and {actual.size}")
    return math.fsum(np.abs(predicted - actual)) / predicted.size


def log_gamma(x: float) -> float:
    """ln Γ(x) for x > 0 (Lanczos, g = 7)."""

    if x <= 0:
        raise ContractViolation(f"log_gamma is defined for x > 0, got {x}")
    if x < 0.5:
        # reflection
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1.0 - x)
    x -= 1.0
    series = _LANCZOS_COEFFICIENTS[0]
    for index, coefficient in enumerate(_LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (x + index)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(series)


def _beta_continued_fraction(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-16) -> float:
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) by modified Lentz continued fraction."""

    if a <= 0 or b <= 0:
        raise ContractViolation("incomplete beta needs a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise ContractViolation(f"incomplete beta needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, max(0.0, front * _beta_continued_fraction(a, b, x) / a))
    return min(1.0, max(0.0, 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b))


def f_survival(statistic: float, dfn: float, dfd: float) -> float:
    """P(F > statistic) for the F(dfn, dfd) distribution."""

    if statistic <= 0:
        return 1.0
    return regularized_incomplete_beta(dfd / 2.0, dfn / 2.0, dfd / (dfd + dfn * statistic))


def t_two_sided(statistic: float, df: float) -> float:
    """P(|T| > |statistic|) for Student's t with *df* degrees of freedom."""

    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + statistic * statistic))


def levene_median(*groups: Sequence[float]) -> TestResult:
    """Brown–Forsythe (median-centred) Levene test for equal variances."""

    if len(groups) < 2:
        raise ContractViolation("Levene test needs at least two groups")
    arrays = [_vector(group, "group") for group in groups]
    if any(array.size < 2 for array in arrays):
        raise ContractViolation("Levene test needs at least two observations per group")
    deviations = [np.abs(array - np.median(array)) for array in arrays]
    k = len(deviations)
    total = sum(array.size for array in deviations)
    group_means = [math.fsum(dev) / dev.size for dev in deviations]
    grand_mean = math.fsum(np.concatenate(deviations)) / total
    between = math.fsum(dev.size * (mean - grand_mean) ** 2 for dev, mean in zip(deviations, group_means))
    within = math.fsum(float(np.sum((dev - mean) ** 2)) for dev, mean in zip(deviations, group_means))
    if within == 0.0:
        raise ContractViolation("Levene test is undefined: deviations have no within-group spread")
    statistic = (total - k) / (k - 1) * between / within
    p_value = f_survival(statistic, k - 1, total - k)
    return TestResult("levene", statistic, p_value, total, tuple(array.size for array in arrays))


def kolmogorov_survival(lam: float) -> float:
    """Asymptotic Kolmogorov tail Q(λ) = 2 Σ (-1)^(j-1) exp(-2 j² λ²)."""

    if lam < 0.2:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 1001):
        term = sign * 2.0 * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
        sign = -sign
    return min(1.0, max(0.0, total))


def ks_two_sample(first: Sequence[float], second: Sequence[float]) -> TestResult:
    """Two-sample Kolmogorov–Smirnov test with the asymptotic p-value."""

    a = np.sort(_vector(first, "first sample"))
    b = np.sort(_vector(second, "second sample"))
    if a.size == 0 or b.size == 0:
        raise ContractViolation("KS test needs non-empty samples")
    support = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, support, side="right") / a.size
    cdf_b = np.searchsorted(b, support, side="right") / b.size
    distance = float(np.max(np.abs(cdf_a - cdf_b)))
    effective = math.sqrt(a.size * b.size / (a.size + b.size))
    lam = (effective + 0.12 + 0.11 / effective) * distance
    return TestResult("ks", distance, kolmogorov_survival(lam), int(a.size + b.size), (int(a.size), int(b.size)))


def pearson(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Pearson correlation with a two-sided t-test p-value."""

    xs = _vector(x, "x")
    ys = _vector(y, "y")
    if xs.size != ys.size:
        raise ContractViolation(f"pearson needs equal lengths, got {xs.size} and {ys.size}")
    if xs.size < 3:
        raise ContractViolation(f"pearson needs n >= 3, got {xs.size}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0.0 or syy == 0.0:
        raise ContractViolation("Correlation is undefined for a constant vector")
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    df = xs.size - 2
    if abs(r) == 1.0:
        p_value = 0.0
    else:
        p_value = t_two_sided(r * math.sqrt(df / (1.0 - r * r)), df)
    return TestResult("pearson", r, p_value, int(xs.size))


# Acklam's rational approximation coefficients.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02, 1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02, 6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00, -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00, 3.754408661907416e00)
_P_LOW = 0.02425


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_quantile(p: float) -> float:
    """Inverse standard normal CDF."""

    if not 0.0 < p < 1.0:
        raise ContractViolation(f"norm_quantile needs p in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    # Halley refinement
    error = norm_cdf(x) - p
    u = error * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def qq_data(residuals: Sequence[float]) -> List[Tuple[float, float]]:
    """(theoretical, observed) pairs of standardized ordered residuals."""

    values = _vector(residuals, "residuals")
    if values.size < 2:
        raise ContractViolation("Q-Q data needs at least two residuals")
    spread = float(np.std(values))
    if spread == 0.0:
        raise ContractViolation("Q-Q data is undefined for constant residuals")
    observed = np.sort((values - values.mean()) / spread)
    n = values.size
    return [(norm_quantile((index + 0.5) / n), float(observed[index])) for index in range(n)]


def fraction_within(residuals: Sequence[float], bound: float = 0.05) -> float:
    values = _vector(residuals, "residuals")
    if values.size == 0:
        raise ContractViolation("fraction_within needs residuals")
    return float(np.count_nonzero(np.abs(values) <= bound)) / values.size


@dataclass(frozen=True)
class ValidationReport:
    mae: float
    baseline_mae: float
    tests: Tuple[TestResult, ...]
    within_fraction: float
    within_bound: float
    qq: Tuple[Tuple[float, float], ...]


def validation_report(
    train_residuals: Sequence[float],
    test_residuals: Sequence[float],
    predictions: Sequence[float],
    actuals: Sequence[float],
    *,
    bound: float = 0.05,
) -> ValidationReport:
    """Run MAE, Levene, KS, Pearson, the tail fraction and Q-Q data on a train/test split."""

    tests = (
        levene_median(train_residuals, test_residuals),
        ks_two_sample(train_residuals, test_residuals),
        pearson(predictions, actuals),
    )
    return ValidationReport(
        mae=mae(predictions, actuals),
        baseline_mae=mae(np.zeros(len(actuals)), actuals),
        tests=tests,
        within_fraction=fraction_within(test_residuals, bound),
        within_bound=bound,
        qq=tuple(qq_data(test_residuals)),
    )
