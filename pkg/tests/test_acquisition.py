"""Tests for the acquisition scores: EKLD, uncertainty sampling, EI."""

import dataclasses

import numpy as np
import pytest
from scipy.stats import norm

from bode.acquisition import (
    AcquisitionScore,
    EkldConfig,
    EkldSweep,
    ei_score,
    ekld_score,
    expected_improvement,
    kld_gaussians,
    us_score,
)
from bode.design import DesignSpace, lhs
from bode.kle import build
from bode.nsgp import (
    Dataset,
    LatentFieldValues,
    LatentHyperparams,
    PosteriorSample,
    predictive_mean_cov,
)
from bode.qoi import QoiSpec, draw_inner_points

UNIT = DesignSpace(bounds=[[0.0, 1.0]])
NOISE = 1e-6


def _stationary_sample(x, y, s=1.5, l=0.3):
    data = Dataset(space=UNIT, designs=x, observations=y, noise_variance=NOISE)
    n = data.n
    fields = LatentFieldValues(
        log_signal=np.full((n, 1), np.log(s)),
        log_length=np.full((n, 1), np.log(l)),
    )
    hyper = LatentHyperparams(
        s_mean=[np.log(s)], s_amp=[1.0], s_scale=[10.0],
        l_mean=[np.log(l)], l_amp=[1.0], l_scale=[10.0],
    )
    return data, PosteriorSample.build(data, fields, hyper)


def _three_point(s=1.5, l=0.3):
    x = np.array([[0.15], [0.5], [0.85]])
    y = np.array([0.4, -0.3, 0.9])
    return _stationary_sample(x, y, s, l)


def _degenerate(exp):
    return dataclasses.replace(
        exp,
        eigenvalues=np.empty(0),
        raw_eigenvalues=np.empty(0),
        eigenvectors=np.zeros((exp.n_quad, 0)),
    )


class TestKldGaussians:
    def test_identical_distributions_are_zero(self):
        assert kld_gaussians(1.3, 0.7, 1.3, 0.7) == 0.0

    def test_unit_mean_shift(self):
        assert kld_gaussians(0.0, 1.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_doubled_scale(self):
        # log(1/2) + 4/2 - 1/2
        expected = 0.8068528194400547
        assert kld_gaussians(0.0, 1.0, 0.0, 2.0) == pytest.approx(expected, abs=1e-12)

    def test_asymmetry_of_the_convention(self):
        # Reversed arguments give log 2 + 1/8 - 1/2.
        forward = kld_gaussians(0.0, 1.0, 0.0, 2.0)
        backward = kld_gaussians(0.0, 2.0, 0.0, 1.0)
        assert backward == pytest.approx(0.3181471805599453, abs=1e-12)
        assert forward != backward

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_rejects_nonpositive_scales(self, bad):
        with pytest.raises(ValueError, match="positive"):
            kld_gaussians(0.0, bad, 0.0, 1.0)
        with pytest.raises(ValueError, match="positive"):
            kld_gaussians(0.0, 1.0, 0.0, bad)

    def test_nonnegative_and_zero_iff_identical(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            mu1, mu2 = rng.normal(size=2)
            sd1, sd2 = np.exp(rng.normal(size=2) * 0.5)
            value = kld_gaussians(mu1, sd1, mu2, sd2)
            assert value >= 0.0
            assert value > 0.0  # distinct parameters almost surely
        assert kld_gaussians(-0.4, 2.2, -0.4, 2.2) == 0.0


class TestEkldConfig:
    def test_defaults(self):
        cfg = EkldConfig()
        assert (cfg.m_posterior, cfg.b_hypothetical, cfg.s_paths) == (50, 50, 50)

    @pytest.mark.parametrize("field", ["m_posterior", "b_hypothetical", "s_paths"])
    def test_counts_at_least_two(self, field):
        with pytest.raises(ValueError, match=field):
            EkldConfig(**{field: 1})

    def test_desk_scale_preset(self):
        cfg = EkldConfig.desk_scale()
        assert (cfg.m_posterior, cfg.b_hypothetical, cfg.s_paths) == (20, 20, 20)
        assert EkldConfig.desk_scale(s_paths=5).s_paths == 5


class TestAcquisitionScore:
    def test_value_must_match_breakdown(self):
        with pytest.raises(ValueError, match="mean of per_sample"):
            AcquisitionScore(value=1.0, per_sample=[0.1, 0.2],
                             prior_moments=(), conditioned_moments=())


class TestEkldSweep:
    def test_matches_brute_force_gp_refit(self):
        """Closed-form conditioning agrees with augmenting the dataset and
        refitting the exact GP, for the expectation QoI."""
        data, sample = _three_point()
        exp = build(sample, n_quad=200, beta=1.0 - 1e-10, seed=0)
        inner = draw_inner_points(QoiSpec(n_inner=400), UNIT,
                                  np.random.default_rng(3))
        spec = QoiSpec(kind="expectation", n_inner=400)
        cfg = EkldConfig(m_posterior=2, b_hypothetical=8, s_paths=4000, seed=5)
        sweep = EkldSweep([exp], spec, cfg, inner, noise_variance=NOISE)

        x_new = np.array([0.3])
        ours = sweep.score(x_new).value

        n = inner.shape[0]
        mean_pri, cov_pri = predictive_mean_cov(inner, sample, full_cov=True)
        mu1 = mean_pri.mean()
        sd1 = np.sqrt(cov_pri.sum() / n ** 2)
        s, l = 1.5, 0.3
        klds = []
        for y_new in sweep.hypothetical_outcomes(x_new)[0]:
            aug = data.append(x_new, y_new)
            fields = LatentFieldValues(
                log_signal=np.full((4, 1), np.log(s)),
                log_length=np.full((4, 1), np.log(l)),
            )
            refit = PosteriorSample.build(aug, fields, sample.hyper)
            mean_post, cov_post = predictive_mean_cov(inner, refit, full_cov=True)
            mu2 = mean_post.mean()
            sd2 = np.sqrt(cov_post.sum() / n ** 2)
            klds.append(kld_gaussians(mu1, sd1, mu2, sd2))
        oracle = np.mean(klds)
        assert ours == pytest.approx(oracle, rel=0.10)

    def test_observed_designs_score_near_zero(self):
        data, sample = _three_point()
        exp = build(sample, n_quad=120, beta=0.999, seed=1)
        inner = draw_inner_points(QoiSpec(n_inner=400), UNIT,
                                  np.random.default_rng(7))
        spec = QoiSpec(kind="expectation", n_inner=400)
        cfg = EkldConfig(m_posterior=2, b_hypothetical=10, s_paths=60, seed=2)
        sweep = EkldSweep([exp], spec, cfg, inner, noise_variance=NOISE)

        candidates = lhs(50, UNIT, seed=11)
        best = max(sweep.score(c).value for c in candidates)
        assert best > 0.0
        for x_obs in data.designs:
            assert sweep.score(x_obs).value <= 0.05 * best

    def test_collapsed_posterior_scores_zero(self):
        _, sample = _three_point()
        exp = _degenerate(build(sample, n_quad=60, beta=0.95, seed=0))
        inner = draw_inner_points(QoiSpec(n_inner=50), UNIT,
                                  np.random.default_rng(1))
        cfg = EkldConfig(m_posterior=2, b_hypothetical=4, s_paths=10, seed=0)
        sweep = EkldSweep([exp], QoiSpec(), cfg, inner, noise_variance=NOISE)
        score = sweep.score(np.array([0.33]))
        assert score.value == 0.0
        np.testing.assert_array_equal(score.per_sample, 0.0)

    def test_per_sample_breakdown_and_nonnegativity(self):
        _, sample = _three_point()
        exp_a = build(sample, n_quad=60, beta=0.99, seed=0)
        _, sample_b = _three_point(s=1.0, l=0.2)
        exp_b = build(sample_b, n_quad=60, beta=0.99, seed=0)
        inner = draw_inner_points(QoiSpec(n_inner=200), UNIT,
                                  np.random.default_rng(4))
        cfg = EkldConfig(m_posterior=2, b_hypothetical=5, s_paths=40, seed=9)
        sweep = EkldSweep([(sample, exp_a), (sample_b, exp_b)], QoiSpec(),
                          cfg, inner, noise_variance=NOISE)
        for x in lhs(5, UNIT, seed=3):
            score = sweep.score(x)
            assert score.per_sample.shape == (2,)
            assert np.all(score.per_sample >= 0.0)
            assert score.value == pytest.approx(score.per_sample.mean())
            assert len(score.prior_moments) == 2
            assert len(score.conditioned_moments) == 2

    def test_seed_determinism_and_sensitivity(self):
        _, sample = _three_point()
        exp = build(sample, n_quad=60, beta=0.99, seed=0)
        inner = draw_inner_points(QoiSpec(n_inner=150), UNIT,
                                  np.random.default_rng(5))
        x = np.array([0.62])
        cfg = EkldConfig(m_posterior=2, b_hypothetical=6, s_paths=30, seed=21)
        first = EkldSweep([exp], QoiSpec(), cfg, inner, NOISE).score(x)
        second = EkldSweep([exp], QoiSpec(), cfg, inner, NOISE).score(x)
        assert first.value == second.value
        np.testing.assert_array_equal(first.per_sample, second.per_sample)
        other_cfg = dataclasses.replace(cfg, seed=22)
        other = EkldSweep([exp], QoiSpec(), other_cfg, inner, NOISE).score(x)
        assert other.value != first.value

    def test_functional_wrapper_matches_sweep(self):
        data, sample = _three_point()
        exp = build(sample, n_quad=60, beta=0.99, seed=0)
        inner = draw_inner_points(QoiSpec(n_inner=100), UNIT,
                                  np.random.default_rng(2))
        cfg = EkldConfig(m_posterior=2, b_hypothetical=4, s_paths=20, seed=3)
        spec = QoiSpec()
        x = np.array([0.44])
        via_wrapper = ekld_score(x, [exp], spec, cfg, data, inner_points=inner)
        via_sweep = EkldSweep([exp], spec, cfg, inner, data.noise_variance).score(x)
        assert via_wrapper.value == via_sweep.value

    def test_empty_posterior_rejected(self):
        inner = np.zeros((3, 1))
        with pytest.raises(ValueError, match="nonempty"):
            EkldSweep([], QoiSpec(), EkldConfig(), inner)


class TestUsScore:
    def test_observed_design_has_tiny_variance(self):
        data, sample = _three_point()
        for x_obs in data.designs:
            assert us_score(x_obs, [sample], data) <= 1e-3

    def test_empty_dataset_gives_prior_variance(self):
        data, sample = _stationary_sample(np.zeros((0, 1)), np.zeros(0), s=1.5)
        value = us_score(np.array([0.5]), [sample], data)
        assert value == pytest.approx(1.5 ** 2 / np.sqrt(2.0), rel=1e-9)

    def test_maximizer_falls_in_largest_gap(self):
        x = np.array([[0.1], [0.4], [0.9]])
        y = np.array([0.2, -0.1, 0.5])
        data, sample = _stationary_sample(x, y)
        grid = np.linspace(0.0, 1.0, 401)[:, None]
        values = [us_score(g, [sample], data) for g in grid]
        best = grid[int(np.argmax(values)), 0]
        assert 0.4 < best < 0.9

    def test_empty_posterior_rejected(self):
        data, _ = _three_point()
        with pytest.raises(ValueError, match="nonempty"):
            us_score(np.array([0.5]), [], data)


class TestExpectedImprovement:
    def test_deterministic_improvement(self):
        assert expected_improvement(mean=1.0, sd=0.0, best=2.0) == 1.0

    def test_deterministic_no_improvement(self):
        assert expected_improvement(mean=2.5, sd=0.0, best=2.0) == 0.0

    def test_at_the_incumbent(self):
        value = expected_improvement(mean=2.0, sd=1.0, best=2.0)
        assert value == pytest.approx(norm.pdf(0.0), abs=1e-12)
        assert value == pytest.approx(0.3989422804014327, abs=1e-12)

    def test_score_averages_over_samples(self):
        data, sample_a = _three_point()
        _, sample_b = _three_point(s=1.0, l=0.2)
        best = float(data.observations.min())
        x = np.array([0.7])
        single_a = ei_score(x, [sample_a], data, best)
        single_b = ei_score(x, [sample_b], data, best)
        both = ei_score(x, [sample_a, sample_b], data, best)
        assert both == pytest.approx(0.5 * (single_a + single_b), rel=1e-12)

    def test_interpolation_point_has_no_improvement(self):
        data, sample = _three_point()
        best = float(data.observations.min())
        # x = 0.5 is the observed minimizer; predictive sd there is ~1e-3.
        assert ei_score(np.array([0.5]), [sample], data, best) <= 1e-2

    def test_empty_posterior_rejected(self):
        data, _ = _three_point()
        with pytest.raises(ValueError, match="nonempty"):
            ei_score(np.array([0.5]), [], data, 0.0)
