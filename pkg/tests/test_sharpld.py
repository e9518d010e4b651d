import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

import privfit as pf
from privfit.errors import InfeasibleError, SizeError, ValidationError


class TestLatticeDistribution:
    def test_validation(self):
        with pytest.raises(ValidationError):
            pf.LatticeDistribution((((0.0,), 0.5), ((1.0,), 0.4)))  # sums to 0.9
        with pytest.raises(ValidationError):
            pf.LatticeDistribution((((0.0,), 1.0), ((1.0, 2.0), 0.0)))

    def test_bernoulli_factory(self):
        d = pf.LatticeDistribution.bernoulli(0.3)
        assert d.mean()[0] == pytest.approx(0.3)
        dc = pf.LatticeDistribution.bernoulli(0.3, centered=True)
        assert dc.mean()[0] == pytest.approx(0.0, abs=1e-15)

    def test_multinomial_indicators(self):
        d = pf.LatticeDistribution.multinomial_indicators((0.2, 0.3, 0.5))
        assert d.d == 2
        assert d.mean() == pytest.approx([0.2, 0.3])


class TestCumulant:
    def test_zero_point(self):
        d = pf.LatticeDistribution.multinomial_indicators((0.2, 0.3, 0.5))
        c = pf.cumulant(d, (0.0, 0.0))
        assert c["value"] == pytest.approx(0.0, abs=1e-15)
        assert c["gradient"] == pytest.approx([0.2, 0.3])
        probs = np.array([0.2, 0.3])
        cov = np.diag(probs) - np.outer(probs, probs)
        assert np.allclose(c["hessian"], cov, atol=1e-14)

    def test_bernoulli_closed_form(self):
        d = pf.LatticeDistribution.bernoulli(0.3)
        c = pf.cumulant(d, (1.0,))
        assert c["value"] == pytest.approx(math.log(0.7 + 0.3 * math.e), rel=1e-14)

    @given(st.integers(0, 10**6), st.integers(1, 3))
    @settings(max_examples=60, deadline=None)
    def test_gradient_finite_differences(self, seed, d_dim):
        rng = np.random.default_rng(seed)
        n_atoms = int(rng.integers(2, 6))
        points = rng.integers(-3, 4, size=(n_atoms, d_dim)).astype(float)
        points[0] += 0.0  # may contain duplicates; probabilities still valid
        probs = rng.dirichlet(np.ones(n_atoms))
        dist = pf.LatticeDistribution(
            tuple((tuple(x), float(p)) for x, p in zip(points, probs)))
        z = rng.normal(size=d_dim)
        grad = pf.cumulant(dist, z)["gradient"]
        h = 1e-6
        for i in range(d_dim):
            zp = z.copy(); zp[i] += h
            zm = z.copy(); zm[i] -= h
            fd = (pf.cumulant(dist, zp)["value"] - pf.cumulant(dist, zm)["value"]) / (2 * h)
            assert grad[i] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_hessian_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            d_dim = int(rng.integers(1, 3))
            n_atoms = int(rng.integers(2, 6))
            points = rng.integers(-3, 4, size=(n_atoms, d_dim)).astype(float)
            probs = rng.dirichlet(np.ones(n_atoms))
            dist = pf.LatticeDistribution(
                tuple((tuple(x), float(p)) for x, p in zip(points, probs)))
            z = rng.normal(size=d_dim)
            eig = np.linalg.eigvalsh(pf.cumulant(dist, z)["hessian"])
            assert eig.min() >= -1e-10


class TestLegendre:
    def test_mean_gives_zero(self):
        d = pf.LatticeDistribution.bernoulli(0.3)
        sol = pf.legendre_transform(d, (0.3,))
        assert sol["rate"] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(sol["zhat"], 0.0, atol=1e-6)

    def test_bernoulli_kl_identity(self):
        d = pf.LatticeDistribution.bernoulli(0.5)
        sol = pf.legendre_transform(d, (0.8,))
        expect = 0.8 * math.log(1.6) + 0.2 * math.log(0.4)
        assert sol["rate"] == pytest.approx(expect, rel=1e-10)
        assert expect == pytest.approx(0.19274, abs=5e-6)

    def test_multinomial_indicator_cramer_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            k = int(rng.integers(2, 6))
            p1 = 0.05 / k + 0.95 * rng.dirichlet(np.ones(k))
            p0 = 0.05 / k + 0.95 * rng.dirichlet(np.ones(k))
            dist = pf.LatticeDistribution.multinomial_indicators(tuple(p1))
            sol = pf.legendre_transform(dist, tuple(p0[: k - 1]))
            kl = pf.kl_multinomial(pf.SimplexPoint(tuple(p0[: k - 1])),
                                   pf.SimplexPoint(tuple(p1[: k - 1])))
            assert sol["rate"] == pytest.approx(kl, abs=1e-9)

    def test_convex_duality_grid(self):
        d = pf.LatticeDistribution.bernoulli(0.4)
        for xi in (0.1, 0.5, 0.85):
            rate = pf.legendre_transform(d, (xi,))["rate"]
            grid = np.linspace(-8, 8, 4001)
            sup = max(xi * z - pf.cumulant(d, (z,))["value"] for z in grid)
            assert rate == pytest.approx(sup, abs=1e-4)

    def test_infeasible_xi(self):
        d = pf.LatticeDistribution.bernoulli(0.5)
        with pytest.raises(InfeasibleError):
            pf.legendre_transform(d, (1.0,))
        with pytest.raises(InfeasibleError):
            pf.legendre_transform(d, (1.5,))


class TestSharpEstimate:
    def test_formula_arithmetic(self):
        d = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        support = lambda z: 0.5 * abs(float(z[0]))  # noqa: E731
        e400 = pf.sharp_ld_estimate(d, (0.2,), support, 400)
        e800 = pf.sharp_ld_estimate(d, (0.2,), support, 800)
        delta = (-400 * e400.rate + (math.sqrt(800) - math.sqrt(400)) * e400.boundary_term
                 - 0.5 * math.log(2))
        assert e800.log_estimate_up_to_constant - e400.log_estimate_up_to_constant \
            == pytest.approx(delta, rel=1e-12)

    def test_rate_matches_kl(self):
        d = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        est = pf.sharp_ld_estimate(d, (0.2,), lambda z: 0.0, 100)
        expect = 0.7 * math.log(1.4) + 0.3 * math.log(0.6)
        assert est.rate == pytest.approx(expect, rel=1e-10)

    def test_xi_zero_reduces_to_prefactor(self):
        d = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        est = pf.sharp_ld_estimate(d, (0.0,), lambda z: 0.0, 256)
        assert est.rate == pytest.approx(0.0, abs=1e-12)
        assert est.log_estimate_up_to_constant == pytest.approx(-0.5 * math.log(256))

    def test_requires_centered(self):
        d = pf.LatticeDistribution.bernoulli(0.5)
        with pytest.raises(ValidationError):
            pf.sharp_ld_estimate(d, (0.7,), lambda z: 0.0, 100)


class TestExactOracle:
    def test_n1_atom_lookup(self):
        d = pf.LatticeDistribution.bernoulli(0.3, centered=True)
        # window around xi=0.7 of halfwidth 0.1 at n=1 contains only atom 0.7
        assert pf.exact_tail_oracle(d, 0.7, 0.1, 1) == pytest.approx(0.3, rel=1e-12)

    def test_binomial_window(self):
        d = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        # window n*xi +/- sqrt(n)*h with h=0.5/sqrt(n): exactly B_100 = 70
        value = pf.exact_tail_oracle(d, 0.2, 0.05, 100)
        assert value == pytest.approx(float(binom.pmf(70, 100, 0.5)), rel=1e-10)

    def test_total_mass(self):
        d = pf.LatticeDistribution.bernoulli(0.4, centered=True)
        assert pf.exact_tail_oracle(d, 0.0, 100.0, 50) == pytest.approx(1.0, rel=1e-12)

    def test_log_slope_approaches_kl(self):
        d = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        kl = 0.7 * math.log(1.4) + 0.3 * math.log(0.6)
        gaps = []
        for n in (100, 200, 400, 800):
            value = pf.exact_tail_oracle(d, 0.2, 0.5, n)
            gaps.append(abs(-math.log(value) / n - kl))
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_size_errors(self):
        d2 = pf.LatticeDistribution.multinomial_indicators((0.3, 0.3, 0.4))
        with pytest.raises(SizeError):
            pf.exact_tail_oracle(d2, 0.2, 0.5, 10)
        d1 = pf.LatticeDistribution.bernoulli(0.5, centered=True)
        with pytest.raises(SizeError):
            pf.exact_tail_oracle(d1, 0.2, 0.5, 2001)
