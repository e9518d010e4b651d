"""LR statistics, reference distributions and calibrated critical values.

The chi-squared CDF is computed from scratch (regularized incomplete gamma,
series below s+1 and a continued fraction above, 1e-12 target) so that tests
can cross-check it against an independent library implementation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NumericalError, SizeError, ValidationError
from .kernels import NoiseKernel, kernel_variance, post_process_nonnegative
from .likelihood import (
    SimplexPoint,
    fisher_information,
    mle_naive,
    mle_true,
    naive_log_likelihood,
    true_log_likelihood,
)
from .tables import FrequencyTable, PerturbedTable, PostProcessedTable

NEGATIVITY_CLAMP = 1e-9
ENUM_MAX_N = 40
ENUM_MAX_K = 3
ENUM_CAP = 10**7


class Model(str, enum.Enum):
    TRUE = "true_model"
    NAIVE = "naive_model"
    MULTINOMIAL = "multinomial"


class CriticalSource(str, enum.Enum):
    CHI2_LIMIT = "chi2_limit"
    EDGEWORTH_NAIVE = "edgeworth_naive"
    MONTE_CARLO = "monte_carlo"
    EXACT_ENUMERATION = "exact_enumeration"


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest collection target

    alpha: float
    model: Model
    critical_source: CriticalSource

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # not a pytest collection target

    statistic: float
    critical_value: float
    reject: bool
    df: int
    critical_source: CriticalSource
    model: Model
    mle: SimplexPoint
    achieved_level: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "schema": "privfit/1",
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "reject": self.reject,
            "df": self.df,
            "model": self.model.value,
            "source": self.critical_source.value,
            "achieved_level": self.achieved_level,
            "mle": list(self.mle.probs),
        }


def _clamp_statistic(value: float) -> float:
    if value < -NEGATIVITY_CLAMP:
        raise NumericalError(f"LR statistic {value} below the negativity clamp; MLE failure")
    return max(value, 0.0)


def lr_statistic_true(b: PerturbedTable, kernel: NoiseKernel, p0: SimplexPoint) -> float:
    """Lambda_T = 2 (sup log L_T - log L_T(p0)), clamped at zero."""
    p_hat = mle_true(b, kernel)
    value = 2 * (true_log_likelihood(p_hat, b, kernel) - true_log_likelihood(p0, b, kernel))
    return _clamp_statistic(value)


def lr_statistic_naive(bplus: PostProcessedTable, p0: SimplexPoint) -> float:
    """Lambda_N = 2 (sup log L_N - log L_N(p0)), clamped at zero."""
    p_hat = mle_naive(bplus)
    value = 2 * (naive_log_likelihood(p_hat, bplus) - naive_log_likelihood(p0, bplus))
    return _clamp_statistic(value)


def lr_statistic_multinomial(a: FrequencyTable, p0: SimplexPoint) -> float:
    """Classical multinomial LR on raw counts (naive statistic at b+ = a)."""
    return lr_statistic_naive(PostProcessedTable(a.counts), p0)


# --- chi-squared reference distribution ------------------------------------

_GAMMA_TOL = 1e-15
_GAMMA_MAX_ITER = 10_000


def _lower_gamma_series(s: float, x: float) -> float:
    term = 1.0 / s
    total = term
    for j in range(1, _GAMMA_MAX_ITER):
        term *= x / (s + j)
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            break
    return total * math.exp(-x + s * math.log(x) - gammaln(s))


def _upper_gamma_cf(s: float, x: float) -> float:
    # Lentz's algorithm for the continued fraction of Q(s, x)
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for j in range(1, _GAMMA_MAX_ITER):
        an = -j * (j - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            break
    return h * math.exp(-x + s * math.log(x) - gammaln(s))


def regularized_lower_gamma(s: float, x: float) -> float:
    if x < 0 or s <= 0:
        raise DomainError("regularized gamma needs x >= 0 and s > 0")
    if x == 0:
        return 0.0
    if x < s + 1.0:
        return min(1.0, _lower_gamma_series(s, x))
    return min(1.0, 1.0 - _upper_gamma_cf(s, x))


def chi2_cdf(t: float, df: int) -> float:
    if t < 0:
        raise DomainError("chi-squared CDF needs t >= 0")
    if df < 1:
        raise DomainError("df must be positive")
    return regularized_lower_gamma(df / 2.0, t / 2.0)


def chi2_quantile(q: float, df: int) -> float:
    """Invert chi2_cdf by bracketed Newton."""
    if not 0 < q < 1:
        raise DomainError("quantile level must be in (0, 1)")
    lo, hi = 0.0, float(df)
    while chi2_cdf(hi, df) < q:
        hi *= 2
    t = df * (1 - 2 / (9 * df) + math.sqrt(2 / (9 * df)) * _normal_quantile(q)) ** 3
    t = min(max(t, lo + 1e-12), hi)
    for _ in range(200):
        f = chi2_cdf(t, df) - q
        if abs(f) < 1e-13:
            break
        if f > 0:
            hi = t
        else:
            lo = t
        pdf = math.exp((df / 2 - 1) * math.log(t) - t / 2 - gammaln(df / 2) - (df / 2) * math.log(2))
        step = f / pdf if pdf > 0 else 0.0
        t_new = t - step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) < 1e-14 * max(1.0, t):
            t = t_new
            break
        t = t_new
    return t


def _normal_quantile(q: float) -> float:
    # Moro/Beasley-Springer rational approximation; only used to seed Newton.
    a = [-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
         1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00]
    b = [-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
         6.680131188771972e01, -1.328068155288572e01]
    c = [-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
         -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00]
    d = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
         3.754408661907416e00]
    p_low = 0.02425
    if q < p_low:
        u = math.sqrt(-2 * math.log(q))
        return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) / \
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1)
    if q > 1 - p_low:
        return -_normal_quantile(1 - q)
    u = q - 0.5
    r = u * u
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)


# --- finite-n reference for the naive statistic -----------------------------

def edgeworth_penalty(t: float, n: int, p0: SimplexPoint, kernel: NoiseKernel) -> float:
    """Explicit noise-variance deficit of the naive null CDF below chi-squared."""
    k = p0.k
    var = kernel_variance(kernel)
    trace = fisher_information(p0).trace
    return (
        0.5 ** ((k + 1) / 2)
        * math.exp(-t / 2)
        * t ** ((k - 1) / 2)
        / math.exp(gammaln((k + 1) / 2))
        * var * trace / n
    )


def edgeworth_naive_cdf(t: float, n: int, p0: SimplexPoint, kernel: NoiseKernel) -> float:
    """Chi-squared CDF minus the explicit variance penalty, clamped to [0, 1].

    The remaining O(1/sqrt(n)) and O(1/n) correction terms have no closed
    form here; calibration beyond this level should use the Monte Carlo or
    exact-enumeration sources.
    """
    if t < 0:
        raise DomainError("needs t >= 0")
    value = chi2_cdf(t, p0.k - 1) - edgeworth_penalty(t, n, p0, kernel)
    return min(1.0, max(0.0, value))


# --- exact small-instance null distribution ---------------------------------

_ENUM_CACHE: dict = {}


def _enumerate_tables(n: int, k: int):
    """All count vectors of k cells summing to n (k <= 3)."""
    if k == 2:
        for a1 in range(n + 1):
            yield (a1, n - a1)
    else:
        for a1 in range(n + 1):
            for a2 in range(n - a1 + 1):
                yield (a1, a2, n - a1 - a2)


def exact_null_distribution(p0: SimplexPoint, n: int, kernel: NoiseKernel, model: Model):
    """Sorted support and cumulative probabilities of the exact null law of Lambda."""
    key = (p0, n, kernel, model)
    if key in _ENUM_CACHE:
        return _ENUM_CACHE[key]
    k = p0.k
    if k > ENUM_MAX_K or n > ENUM_MAX_N:
        raise SizeError("exact enumeration limited to k <= 3 and n <= 40")
    n_tables = n + 1 if k == 2 else (n + 1) * (n + 2) // 2
    if n_tables * (2 * kernel.m + 1) ** (k - 1) > ENUM_CAP:
        raise SizeError("exact enumeration instance too large")

    full_p = np.asarray(p0.full)
    log_p = np.log(full_p)

    def table_log_pmf(a):
        c = np.asarray(a)
        return float(gammaln(n + 1) - gammaln(c + 1).sum() + c @ log_p)

    stat_of: dict = {}
    weight_of: dict = {}
    if model is Model.MULTINOMIAL:
        for a in _enumerate_tables(n, k):
            stat = lr_statistic_multinomial(FrequencyTable(a), p0)
            weight_of[stat] = weight_of.get(stat, 0.0) + math.exp(table_log_pmf(a))
    else:
        noise_probs = kernel.probs
        offsets = kernel.offsets
        b_prob: dict = {}
        for a in _enumerate_tables(n, k):
            pa = math.exp(table_log_pmf(a))
            if k == 2:
                for l1, w1 in zip(offsets, noise_probs):
                    b = (a[0] + int(l1), a[1] - int(l1))
                    b_prob[b] = b_prob.get(b, 0.0) + pa * w1
            else:
                for l1, w1 in zip(offsets, noise_probs):
                    for l2, w2 in zip(offsets, noise_probs):
                        b = (a[0] + int(l1), a[1] + int(l2), a[2] - int(l1) - int(l2))
                        b_prob[b] = b_prob.get(b, 0.0) + pa * w1 * w2
        for b, pb in b_prob.items():
            bt = PerturbedTable(b, n)
            if model is Model.TRUE:
                if b not in stat_of:
                    stat_of[b] = lr_statistic_true(bt, kernel, p0)
                stat = stat_of[b]
            else:
                stat = lr_statistic_naive(post_process_nonnegative(bt), p0)
            weight_of[stat] = weight_of.get(stat, 0.0) + pb

    stats = np.array(sorted(weight_of))
    cum = np.cumsum([weight_of[s] for s in stats])
    cum /= cum[-1]
    _ENUM_CACHE[key] = (stats, cum)
    return stats, cum


def exact_null_cdf(t: float, p0: SimplexPoint, n: int, kernel: NoiseKernel,
                   model: Model) -> float:
    """Exact Pr[Lambda <= t] under the null, by full enumeration."""
    stats, cum = exact_null_distribution(p0, n, kernel, model)
    idx = np.searchsorted(stats, t + 1e-12, side="right")
    return 0.0 if idx == 0 else float(cum[idx - 1])


def exact_critical_value(alpha: float, p0: SimplexPoint, n: int, kernel: NoiseKernel,
                         model: Model) -> tuple[float, float]:
    """Smallest achievable critical point with level <= alpha, plus the achieved level."""
    stats, cum = exact_null_distribution(p0, n, kernel, model)
    idx = int(np.searchsorted(cum, 1 - alpha - 1e-12, side="left"))
    idx = min(idx, len(stats) - 1)
    return float(stats[idx]), float(1.0 - cum[idx])


def calibrated_critical_value(alpha: float, p0: SimplexPoint, n: int,
                              kernel: NoiseKernel, model: Model,
                              source: CriticalSource, mc_budget: int = 100_000,
                              seed: int = 0) -> float:
    if not 0 < alpha < 1:
        raise ValidationError("alpha must be in (0, 1)")
    if source is CriticalSource.CHI2_LIMIT:
        return chi2_quantile(1 - alpha, p0.k - 1)
    if source is CriticalSource.EDGEWORTH_NAIVE:
        lo, hi = 0.0, chi2_quantile(1 - alpha, p0.k - 1) + 1.0
        while edgeworth_naive_cdf(hi, n, p0, kernel) < 1 - alpha:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if edgeworth_naive_cdf(mid, n, p0, kernel) < 1 - alpha:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    if source is CriticalSource.MONTE_CARLO:
        from . import mc

        plan = mc.SimPlan(trials=mc_budget, seed=seed, n=n, truth=p0,
                          kernel=kernel, model=model, p0=p0, alpha=alpha)
        stats = np.sort(mc.simulate_statistics(plan))
        # smallest simulated value whose empirical CDF reaches 1 - alpha
        rank = math.ceil((1 - alpha) * mc_budget) - 1
        return float(stats[max(rank, 0)])
    if source is CriticalSource.EXACT_ENUMERATION:
        return exact_critical_value(alpha, p0, n, kernel, model)[0]
    raise ValidationError(f"unknown critical source {source!r}")


def run_test(data, kernel: NoiseKernel, p0: SimplexPoint, config: TestConfig,
             seed: int = 0, mc_budget: int = 100_000) -> TestOutcome:
    """Compute the statistic for the configured model and compare to its critical value."""
    model = config.model
    if model is Model.TRUE:
        if not isinstance(data, PerturbedTable):
            raise ValidationError("the true-model test runs on a PerturbedTable")
        mle = mle_true(data, kernel)
        stat = lr_statistic_true(data, kernel, p0)
        n = data.n
    elif model is Model.NAIVE:
        if isinstance(data, PerturbedTable):
            data = post_process_nonnegative(data)
        if not isinstance(data, PostProcessedTable):
            raise ValidationError("the naive-model test runs on a PostProcessedTable")
        mle = mle_naive(data)
        stat = lr_statistic_naive(data, p0)
        n = data.n_plus
    elif model is Model.MULTINOMIAL:
        if isinstance(data, PerturbedTable):
            data = FrequencyTable(data.values)
        if not isinstance(data, FrequencyTable):
            raise ValidationError("the multinomial test runs on a FrequencyTable")
        mle = mle_naive(PostProcessedTable(data.counts))
        stat = lr_statistic_multinomial(data, p0)
        n = data.n
    else:
        raise ValidationError(f"unknown model {model!r}")

    achieved = None
    if config.critical_source is CriticalSource.EXACT_ENUMERATION:
        crit, achieved = exact_critical_value(config.alpha, p0, n, kernel, model)
    else:
        crit = calibrated_critical_value(config.alpha, p0, n, kernel, model,
                                         config.critical_source, mc_budget, seed)
    return TestOutcome(
        statistic=stat, critical_value=crit, reject=stat > crit,
        df=p0.k - 1, critical_source=config.critical_source, model=model,
        mle=mle, achieved_level=achieved,
    )
