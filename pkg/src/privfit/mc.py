"""Seeded Monte Carlo estimation of null CDFs, power and power exponents.

Statistics are memoized per unique perturbed table: for k = 2 the statistic
depends only on the single free cell, so million-trial runs reduce to a few
hundred distinct evaluations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .gof import Model, lr_statistic_multinomial, lr_statistic_naive, lr_statistic_true
from .kernels import NoiseKernel, _sample_with_rng, kernel_from_json, kernel_to_json
from .likelihood import SimplexPoint
from .tables import FrequencyTable, PerturbedTable, PostProcessedTable

_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class SimPlan:
    trials: int
    seed: int
    n: int
    truth: SimplexPoint
    kernel: NoiseKernel
    model: Model
    p0: SimplexPoint
    alpha: float

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must be in (0, 1)")
        if self.truth.k != self.p0.k:
            raise ValidationError("truth and p0 must have the same number of cells")


@dataclass(frozen=True)
class SimSummary:
    power_hat: float
    stderr: float
    exponent_hat: float | None
    exponent_stderr: float | None
    ci_low: float
    ci_high: float
    trials_used: int
    saturated: bool

    def to_json_dict(self) -> dict:
        return {
            "schema": "privfit/1",
            "power_hat": self.power_hat,
            "stderr": self.stderr,
            "exponent_hat": self.exponent_hat,
            "exponent_stderr": self.exponent_stderr,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "trials_used": self.trials_used,
            "saturated": self.saturated,
        }


def _wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    z = _WILSON_Z
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def simulate_statistics(plan: SimPlan) -> np.ndarray:
    """Per-trial LR statistics for the plan's model; deterministic given the seed."""
    rng = np.random.default_rng(plan.seed)
    k = plan.truth.k
    n = plan.n
    counts = rng.multinomial(n, plan.truth.full, size=plan.trials)

    if plan.model is Model.MULTINOMIAL:
        free = counts[:, : k - 1]
    else:
        noise = _sample_with_rng(plan.kernel, rng, (plan.trials, k - 1))
        free = counts[:, : k - 1] + noise

    uniq, inverse = np.unique(free, axis=0, return_inverse=True)
    stats = np.empty(len(uniq))
    for i, row in enumerate(uniq):
        stats[i] = _statistic_for_row(tuple(int(v) for v in row), n, plan)
    return stats[inverse]


def _statistic_for_row(free: tuple[int, ...], n: int, plan: SimPlan) -> float:
    if plan.model is Model.TRUE:
        return lr_statistic_true(PerturbedTable.from_free_cells(free, n), plan.kernel, plan.p0)
    if plan.model is Model.NAIVE:
        clipped = tuple(max(0, v) for v in free)
        last = max(0, n - sum(clipped))
        return lr_statistic_naive(PostProcessedTable(clipped + (last,)), plan.p0)
    return lr_statistic_multinomial(FrequencyTable(free + (n - sum(free),)), plan.p0)


def simulate_null_cdf(plan: SimPlan, t_grid) -> list[dict]:
    """Empirical null CDF of the statistic at each grid point, with binomial SEs."""
    if plan.truth != plan.p0:
        raise ValidationError("null simulation requires truth == p0")
    stats = np.sort(simulate_statistics(plan))
    out = []
    for t in t_grid:
        count = int(np.searchsorted(stats, t, side="right"))
        f = count / plan.trials
        out.append({
            "t": float(t),
            "cdf": f,
            "stderr": math.sqrt(f * (1 - f) / plan.trials),
        })
    return out


def _summarize(rejections: int, plan: SimPlan) -> SimSummary:
    trials = plan.trials
    beta = rejections / trials
    stderr = math.sqrt(beta * (1 - beta) / trials)
    lo, hi = _wilson_interval(rejections, trials)
    saturated = rejections == trials
    if saturated:
        exponent, exp_se = None, None
    elif rejections == 0:
        exponent, exp_se = 0.0, 0.0
    else:
        exponent = -math.log(1 - beta) / plan.n
        # delta method: d/dbeta [-log(1-beta)/n] = 1/(n(1-beta))
        exp_se = stderr / (plan.n * (1 - beta))
    return SimSummary(beta, stderr, exponent, exp_se, lo, hi, trials, saturated)


def estimate_power(plan: SimPlan, critical_value: float) -> SimSummary:
    """beta_hat = fraction of simulated statistics above the critical value."""
    stats = simulate_statistics(plan)
    return _summarize(int(np.sum(stats > critical_value)), plan)


def estimate_exponent(plan: SimPlan, critical_value: float) -> SimSummary:
    """Power exponent -(1/n) log(1 - beta_hat) with a delta-method CI."""
    return estimate_power(plan, critical_value)


def min_sample_size(truth: SimplexPoint, p0: SimplexPoint, kernel: NoiseKernel,
                    model: Model, alpha: float, beta_target: float,
                    search_bounds: tuple[int, int], trials: int = 10_000,
                    seed: int = 0, critical_value_fn=None) -> int:
    """Smallest n in bounds whose Wilson lower power bound reaches beta_target.

    critical_value_fn(n) supplies the per-n critical value; defaults to the
    chi-squared limit quantile (n-free).
    """
    if not alpha < beta_target < 1:
        raise ValidationError("beta_target must lie in (alpha, 1)")
    lo, hi = search_bounds
    if lo < 1 or hi < lo:
        raise ValidationError("bad search bounds")
    if critical_value_fn is None:
        from .gof import chi2_quantile

        crit = chi2_quantile(1 - alpha, p0.k - 1)
        critical_value_fn = lambda n: crit  # noqa: E731

    def reaches(n: int) -> bool:
        plan = SimPlan(trials=trials, seed=seed, n=n, truth=truth, kernel=kernel,
                       model=model, p0=p0, alpha=alpha)
        summary = estimate_power(plan, critical_value_fn(n))
        return summary.ci_low >= beta_target

    if reaches(lo):
        return lo
    if not reaches(hi):
        plan = SimPlan(trials=trials, seed=seed, n=hi, truth=truth, kernel=kernel,
                       model=model, p0=p0, alpha=alpha)
        summary = estimate_power(plan, critical_value_fn(hi))
        raise ValidationError(
            f"power target {beta_target} not reached at n={hi} "
            f"(power_hat={summary.power_hat:.4f})"
        )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi


def plan_to_json(plan: SimPlan) -> str:
    return json.dumps({
        "schema": "privfit/1",
        "trials": plan.trials,
        "seed": plan.seed,
        "n": plan.n,
        "truth": list(plan.truth.probs),
        "kernel": json.loads(kernel_to_json(plan.kernel)),
        "model": plan.model.value,
        "p0": list(plan.p0.probs),
        "alpha": plan.alpha,
    })


def plan_from_json(text: str) -> SimPlan:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad plan JSON: {exc}") from exc
    try:
        return SimPlan(
            trials=int(spec["trials"]),
            seed=int(spec["seed"]),
            n=int(spec["n"]),
            truth=SimplexPoint(tuple(spec["truth"])),
            kernel=kernel_from_json(json.dumps(spec["kernel"])),
            model=Model(spec["model"]),
            p0=SimplexPoint(tuple(spec["p0"])),
            alpha=float(spec["alpha"]),
        )
    except KeyError as exc:
        raise ValidationError(f"plan JSON missing field {exc}") from exc
