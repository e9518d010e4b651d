import json
import math

import numpy as np
import pytest

import privfit as pf
from privfit.errors import ValidationError
from privfit.gof import Model
from privfit.mc import plan_from_json, plan_to_json, simulate_statistics


def make_plan(**kwargs):
    defaults = dict(
        trials=1000, seed=1, n=50, truth=pf.SimplexPoint((0.5,)),
        kernel=pf.make_kernel("laplace", 0.5, 2), model=Model.TRUE,
        p0=pf.SimplexPoint((0.5,)), alpha=0.05,
    )
    defaults.update(kwargs)
    return pf.SimPlan(**defaults)


class TestDeterminism:
    def test_identical_plans_identical_statistics(self):
        a = simulate_statistics(make_plan())
        b = simulate_statistics(make_plan())
        assert np.array_equal(a, b)

    def test_seed_changes_output(self):
        a = simulate_statistics(make_plan(seed=1))
        b = simulate_statistics(make_plan(seed=2))
        assert not np.array_equal(a, b)

    def test_identical_summaries(self):
        s1 = pf.estimate_power(make_plan(truth=pf.SimplexPoint((0.4,))), 3.8415)
        s2 = pf.estimate_power(make_plan(truth=pf.SimplexPoint((0.4,))), 3.8415)
        assert s1 == s2


class TestNullCdf:
    def test_requires_null(self):
        with pytest.raises(ValidationError):
            pf.simulate_null_cdf(make_plan(truth=pf.SimplexPoint((0.4,))), [1.0])

    def test_single_trial_step(self):
        out = pf.simulate_null_cdf(make_plan(trials=1), [0.0, 1e9])
        assert out[0]["cdf"] in (0.0, 1.0)
        assert out[-1]["cdf"] == 1.0

    def test_matches_exact_enumeration(self):
        plan = make_plan(trials=200_000, n=30, seed=3)
        out = pf.simulate_null_cdf(plan, [1.0, 2.0, 4.0])
        for rec in out:
            exact = pf.exact_null_cdf(rec["t"], plan.p0, plan.n, plan.kernel, Model.TRUE)
            assert abs(rec["cdf"] - exact) <= 4 * max(rec["stderr"], 1e-6)

    def test_naive_pipeline_matches_exact(self):
        plan = make_plan(trials=200_000, n=20, seed=4, model=Model.NAIVE)
        out = pf.simulate_null_cdf(plan, [2.0, 4.0])
        for rec in out:
            exact = pf.exact_null_cdf(rec["t"], plan.p0, plan.n, plan.kernel, Model.NAIVE)
            assert abs(rec["cdf"] - exact) <= 4 * max(rec["stderr"], 1e-6)


class TestPower:
    def test_size_matches_level_at_m0(self):
        plan = make_plan(trials=200_000, n=10_000, seed=5,
                         kernel=pf.make_kernel("laplace", 1.0, 0),
                         model=Model.MULTINOMIAL)
        summary = pf.estimate_power(plan, pf.chi2_quantile(0.95, 1))
        assert abs(summary.power_hat - 0.05) <= 4 * summary.stderr + 0.002

    def test_distant_alternative_saturates(self):
        plan = make_plan(trials=20_000, n=500, seed=6,
                         truth=pf.SimplexPoint((0.1,)),
                         kernel=pf.make_kernel("laplace", 0.5, 3))
        summary = pf.estimate_power(plan, pf.chi2_quantile(0.95, 1))
        assert summary.power_hat == 1.0
        assert summary.saturated
        assert summary.exponent_hat is None

    def test_monotone_in_n(self):
        kern = pf.make_kernel("laplace", 0.5, 2)
        crit = pf.chi2_quantile(0.95, 1)
        s200 = pf.estimate_power(make_plan(trials=100_000, n=200, seed=7,
                                           truth=pf.SimplexPoint((0.45,)),
                                           kernel=kern), crit)
        s400 = pf.estimate_power(make_plan(trials=100_000, n=400, seed=7,
                                           truth=pf.SimplexPoint((0.45,)),
                                           kernel=kern), crit)
        assert s200.power_hat <= s400.power_hat + 4 * (s200.stderr + s400.stderr)

    def test_wilson_interval_contains_estimate(self):
        plan = make_plan(trials=5000, truth=pf.SimplexPoint((0.45,)))
        s = pf.estimate_power(plan, 3.8415)
        assert s.ci_low <= s.power_hat <= s.ci_high


class TestExponent:
    def test_zero_rejections(self):
        plan = make_plan(trials=100)
        s = pf.estimate_exponent(plan, 1e9)
        assert s.power_hat == 0.0 and s.exponent_hat == 0.0

    def test_exponent_formula(self):
        plan = make_plan(trials=50_000, n=300, seed=8, truth=pf.SimplexPoint((0.45,)))
        s = pf.estimate_exponent(plan, pf.chi2_quantile(0.95, 1))
        assert 0 < s.power_hat < 1
        assert s.exponent_hat == pytest.approx(-math.log(1 - s.power_hat) / 300, rel=1e-12)
        assert s.exponent_stderr == pytest.approx(
            s.stderr / (300 * (1 - s.power_hat)), rel=1e-12)


class TestMinSampleSize:
    def test_lower_bound_returned_when_sufficient(self):
        n = pf.min_sample_size(pf.SimplexPoint((0.1,)), pf.SimplexPoint((0.5,)),
                               pf.make_kernel("laplace", 0.5, 2), Model.TRUE,
                               0.05, 0.9, (400, 1000), trials=4000, seed=9)
        assert n == 400

    def test_bisection_finds_threshold(self):
        kern = pf.make_kernel("laplace", 1.0, 0)
        n = pf.min_sample_size(pf.SimplexPoint((0.35,)), pf.SimplexPoint((0.5,)),
                               kern, Model.MULTINOMIAL, 0.05, 0.9, (20, 2000),
                               trials=4000, seed=9)
        assert 20 < n < 2000
        # private mechanism needs at least as many samples (within MC slack)
        n_priv = pf.min_sample_size(pf.SimplexPoint((0.35,)), pf.SimplexPoint((0.5,)),
                                    pf.make_kernel("laplace", 0.5, 3), Model.TRUE,
                                    0.05, 0.9, (20, 2000), trials=4000, seed=9)
        assert n_priv >= n - 30

    def test_unreachable_target(self):
        with pytest.raises(ValidationError, match="not reached"):
            pf.min_sample_size(pf.SimplexPoint((0.49,)), pf.SimplexPoint((0.5,)),
                               pf.make_kernel("laplace", 1.0, 0), Model.MULTINOMIAL,
                               0.05, 0.99, (10, 50), trials=2000, seed=9)

    def test_bad_target(self):
        with pytest.raises(ValidationError):
            pf.min_sample_size(pf.SimplexPoint((0.4,)), pf.SimplexPoint((0.5,)),
                               pf.make_kernel("laplace", 1.0, 0), Model.MULTINOMIAL,
                               0.05, 0.04, (10, 50))


class TestPlanJson:
    def test_round_trip(self):
        plan = make_plan()
        again = plan_from_json(plan_to_json(plan))
        assert again == plan

    def test_schema_field(self):
        assert json.loads(plan_to_json(make_plan()))["schema"] == "privfit/1"

    def test_bad_json(self):
        with pytest.raises(ValidationError):
            plan_from_json("{")
        with pytest.raises(ValidationError):
            plan_from_json("{}")


class TestKGreaterThan2:
    def test_k3_pipeline_runs(self):
        plan = pf.SimPlan(trials=2000, seed=10, n=60,
                          truth=pf.SimplexPoint((0.3, 0.3)),
                          kernel=pf.make_kernel("laplace", 0.5, 1),
                          model=Model.TRUE, p0=pf.SimplexPoint((0.3, 0.3)), alpha=0.05)
        out = pf.simulate_null_cdf(plan, [3.0, 6.0])
        assert 0 < out[0]["cdf"] < out[1]["cdf"] <= 1.0
