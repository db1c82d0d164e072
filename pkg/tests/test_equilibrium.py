"""Equilibrium CDF, quantile sampler, payoffs and the Monte Carlo audit."""

import numpy as np
import pytest

from contest_opt import (
    EquilibriumModel,
    QuadratureConfig,
    RangeError,
    TrivialPolicyError,
    cdf,
    cdf_table,
    expected_revenue,
    hm,
    make_policy,
    quantile,
    simulate,
    two_level,
    uni,
    utility,
    welfare_quality_analytic,
)


def random_model(rng, n=5):
    raw = np.sort(rng.dirichlet(np.ones(n)))[::-1]
    return EquilibriumModel(make_policy(raw), rng.uniform(0.5, 4.0))


class TestCdf:
    def test_winner_take_all_power_law(self):
        model = EquilibriumModel(hm(5), 2.0)
        for q in (0.1, 0.5, 0.9):
            assert cdf(model, q) == pytest.approx(q ** (2 / 4), abs=1e-12)

    def test_two_player_linear_cost_identity(self):
        model = EquilibriumModel(hm(2), 1.0)
        assert cdf(model, 0.7) == pytest.approx(0.7, abs=1e-12)

    def test_boundaries(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            model = random_model(rng)
            assert cdf(model, 0.0) == 0.0
            assert cdf(model, model.q_max) == 1.0

    def test_out_of_support(self):
        model = EquilibriumModel(uni(5), 2.0)
        with pytest.raises(RangeError):
            cdf(model, model.q_max + 0.1)

    def test_trivial_policy_rejected(self):
        with pytest.raises(TrivialPolicyError):
            EquilibriumModel(make_policy((0.25,) * 4), 2.0)


class TestQuantile:
    def test_support_endpoint(self):
        model = EquilibriumModel(uni(5), 2.0)
        assert model.q_max == pytest.approx(0.5)
        assert quantile(model, 1.0) == pytest.approx(0.5)

    def test_winner_take_all_midpoint(self):
        model = EquilibriumModel(hm(5), 2.0)
        assert quantile(model, 0.5) == pytest.approx((0.5**4) ** 0.5)

    def test_zero(self):
        rng = np.random.default_rng(8)
        assert quantile(random_model(rng), 0.0) == 0.0

    def test_round_trips(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            model = random_model(rng)
            u = rng.random()
            q = rng.uniform(0, model.q_max)
            assert cdf(model, quantile(model, u)) == pytest.approx(u, abs=1e-10)
            assert quantile(model, cdf(model, q)) == pytest.approx(q, abs=1e-10)


class TestPayoffs:
    def test_revenue_boundaries(self):
        p = make_policy((0.5, 0.3, 0.2, 0.0))
        assert expected_revenue(p, 1.0) == pytest.approx(0.5)
        assert expected_revenue(p, 0.0) == pytest.approx(0.0)

    def test_revenue_uniform_except_last(self):
        assert expected_revenue(uni(5), 0.5) == pytest.approx(0.234375)

    def test_revenue_monotone_in_rank_probability(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            p = make_policy(np.sort(rng.dirichlet(np.ones(5)))[::-1])
            f = np.sort(rng.random(10))
            values = expected_revenue(p, f)
            assert np.all(np.diff(values) >= -1e-12)

    def test_indifference_on_support(self):
        """The payoff of any on-support quality equals the bottom share."""
        rng = np.random.default_rng(16)
        for _ in range(20):
            model = random_model(rng)
            pn = model.policy.pn
            qs = np.linspace(0, model.q_max, 102)[1:-1]
            residual = np.abs(
                np.asarray(expected_revenue(model.policy, cdf(model, qs)))
                - pn
                - qs**model.beta
            )
            assert residual.max() <= 1e-12

    def test_utility_at_zero(self):
        rng = np.random.default_rng(44)
        model = random_model(rng)
        assert utility(model, 0.0) == pytest.approx(model.policy.pn, abs=1e-12)

    def test_utility_overshoot_examples(self):
        model = EquilibriumModel(hm(5), 2.0)
        assert utility(model, 1.0) == pytest.approx(0.0, abs=1e-12)
        model = EquilibriumModel(uni(5), 2.0)
        assert utility(model, 0.7) == pytest.approx(0.25 - 0.49)

    def test_no_profitable_deviation_above_support(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            model = random_model(rng)
            q = model.q_max + rng.uniform(1e-9, 1.0)
            assert utility(model, q) <= model.policy.pn + 1e-12


class TestAnalyticWelfare:
    def test_winner_take_all_values(self):
        w, q = welfare_quality_analytic(hm(5), 2.0, QuadratureConfig(m=50_000))
        assert w == pytest.approx(5 / 7, abs=2e-4)
        assert q == pytest.approx(1 / 3, abs=2e-5)

    def test_unit_cost_quality_is_mean_share(self):
        w, q = welfare_quality_analytic(make_policy((0.6, 0.4, 0.0, 0.0)), 1.0)
        assert q == pytest.approx(0.25, abs=1e-4)


class TestCdfTable:
    def test_columns_and_range(self):
        table = cdf_table(EquilibriumModel(hm(5), 2.0), 11)
        assert table.shape == (11, 2)
        assert table[0, 1] == 0.0
        assert table[-1, 1] == 1.0
        assert np.all(np.diff(table[:, 1]) >= 0)


class TestSimulate:
    def test_matches_analytic_within_three_sigma(self):
        rng = np.random.default_rng(2)
        for p in (hm(5), uni(5), two_level(5, rng.uniform(0.25, 1.0))):
            model = EquilibriumModel(p, 2.0)
            report = simulate(model, 200_000, seed=int(rng.integers(2**31)))
            welfare, quality = welfare_quality_analytic(p, 2.0)
            assert abs(report.empirical_welfare - welfare) <= 3 * report.welfare_se
            assert abs(report.empirical_quality - quality) <= 3 * report.quality_se

    def test_no_deviation_beats_equilibrium(self):
        model = EquilibriumModel(uni(5), 2.0)
        report = simulate(model, 100_000, seed=5)
        assert report.max_deviation_gain <= 3 * report.deviation_se + 1e-3

    def test_deterministic_for_fixed_seed(self):
        model = EquilibriumModel(hm(5), 2.0)
        a = simulate(model, 50_000, seed=9)
        b = simulate(model, 50_000, seed=9)
        assert a == b

    def test_seed_recorded(self):
        model = EquilibriumModel(hm(3), 1.0)
        report = simulate(model, 2000, seed=77)
        assert report.seed == 77 and report.samples == 2000

    def test_minimum_samples(self):
        model = EquilibriumModel(hm(3), 1.0)
        with pytest.raises(Exception):
            simulate(model, 10, seed=0)
