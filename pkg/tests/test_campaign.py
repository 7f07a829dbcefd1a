"""Tests for the outer sequential-design loop."""

import dataclasses

import numpy as np
import pytest

from bode.acquisition import EkldConfig
from bode.bgo import BgoConfig
from bode.campaign import (
    CampaignConfig,
    CampaignTrace,
    IterationRecord,
    OracleError,
    _unstandardize_summary,
    qoi_summary,
    run,
    summarize_pooled,
)
from bode.design import DesignSpace
from bode.hmc import HmcConfig
from bode.kle import build as kle_build
from bode.nsgp import (
    Dataset,
    HyperpriorConfig,
    LatentFieldValues,
    LatentHyperparams,
    PosteriorSample,
)
from bode.qoi import QoiSpec

UNIT = DesignSpace(bounds=np.array([[0.0, 1.0]]))


def _tiny_cfg(**overrides):
    """A campaign configuration small enough for unit tests."""
    defaults = dict(
        space=UNIT,
        n_initial=4,
        n_max=6,
        acquisition="us",
        qoi=QoiSpec(n_inner=300),
        hmc=HmcConfig(n_samples=120, burn_in=40, thin_to=8, seed=0),
        ekld=EkldConfig(m_posterior=4, b_hypothetical=4, s_paths=8),
        bgo=BgoConfig(n_init=3, n_total=5, n_candidates=64),
        kle_n_quad=50,
        seed=7,
    )
    defaults.update(overrides)
    return CampaignConfig(**defaults)


def _smooth_oracle(x):
    x = np.atleast_1d(x)
    return float(np.sin(4.0 * x[0]) + x[0])


def _truncated(data, k):
    return Dataset(space=data.space, designs=data.designs[:k],
                   observations=data.observations[:k],
                   noise_variance=data.noise_variance)


def _stationary_sample(x, y, s=1.0, ell=0.2, noise=1e-6):
    x = np.atleast_2d(np.asarray(x, dtype=float).reshape(-1, 1))
    data = Dataset(space=UNIT, designs=x, observations=np.asarray(y),
                   noise_variance=noise)
    n, d = x.shape
    fields = LatentFieldValues(
        log_signal=np.full((n, d), np.log(s)),
        log_length=np.full((n, d), np.log(ell)),
    )
    hyper = LatentHyperparams(
        s_mean=np.full(d, np.log(s)), s_amp=np.ones(d), s_scale=np.ones(d),
        l_mean=np.full(d, np.log(ell)), l_amp=np.ones(d), l_scale=np.ones(d),
    )
    return PosteriorSample.build(data, fields, hyper)


def _collapsed_expansion():
    """Expansion whose every path equals the posterior mean."""
    sample = _stationary_sample([0.2, 0.5, 0.8], [0.3, -0.1, 0.6])
    exp = kle_build(sample, n_quad=40, beta=0.999, seed=1)
    return dataclasses.replace(
        exp,
        eigenvalues=np.empty(0),
        raw_eigenvalues=np.empty(0),
        eigenvectors=np.zeros((exp.n_quad, 0)),
    )


class TestCampaignConfig:
    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            _tiny_cfg(n_initial=0)
        with pytest.raises(ValueError):
            _tiny_cfg(n_max=4)  # equal to n_initial

    def test_rejects_unknown_acquisition(self):
        with pytest.raises(ValueError, match="acquisition"):
            _tiny_cfg(acquisition="entropy")

    def test_rejects_bad_refit_and_noise(self):
        with pytest.raises(ValueError):
            _tiny_cfg(refit_every=0)
        with pytest.raises(ValueError):
            _tiny_cfg(noise_variance=0.0)

    def test_default_inner_budget_follows_dimension(self):
        square = DesignSpace(bounds=np.array([[0.0, 1.0], [0.0, 1.0]]))
        assert CampaignConfig(space=UNIT).bgo.n_total == 30
        assert CampaignConfig(space=square).bgo.n_total == 40

    def test_desk_scale_presets(self):
        cfg = CampaignConfig.desk_scale(UNIT)
        assert cfg.hmc.n_samples == 1500
        assert cfg.hmc.burn_in == 500
        assert cfg.ekld.m_posterior == 20
        assert cfg.ekld.b_hypothetical == 20
        assert cfg.ekld.s_paths == 20
        assert cfg.kle_n_quad == 200

        square = DesignSpace(bounds=np.array([[0.0, 1.0], [0.0, 1.0]]))
        assert CampaignConfig.desk_scale(square).kle_n_quad == 400

    def test_desk_scale_accepts_overrides(self):
        cfg = CampaignConfig.desk_scale(UNIT, n_max=12, acquisition="us")
        assert cfg.n_max == 12
        assert cfg.acquisition == "us"
        assert cfg.hmc.n_samples == 1500


class TestIterationRecord:
    def _record(self, **overrides):
        defaults = dict(iteration=1, x=np.array([0.5]), y=1.0,
                        qoi_mean=0.5, qoi_lo=0.1, qoi_hi=0.9,
                        qoi_mean_fit=0.5, qoi_lo_fit=0.1, qoi_hi_fit=0.9,
                        acq_value=0.2, wall_ms=10.0)
        defaults.update(overrides)
        return IterationRecord(**defaults)

    def test_rejects_inverted_band(self):
        with pytest.raises(ValueError, match="lo <= hi"):
            self._record(qoi_lo=1.0, qoi_hi=0.0)

    def test_rejects_negative_wall_clock(self):
        with pytest.raises(ValueError):
            self._record(wall_ms=-1.0)

    def test_flattens_design(self):
        rec = self._record(x=np.array([[0.5]]))
        assert rec.x.shape == (1,)


class TestSummarizePooled:
    def test_constant_draws_collapse_the_band(self):
        mean, lo, hi = summarize_pooled(np.full(100, 3.25))
        assert mean == lo == hi == 3.25

    def test_gaussian_band_matches_normal_quantiles(self):
        rng = np.random.default_rng(0)
        mean, lo, hi = summarize_pooled(rng.standard_normal(2500))
        assert abs(lo - (-1.96)) <= 0.1
        assert abs(hi - 1.96) <= 0.1
        assert abs(mean) <= 0.1

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            summarize_pooled(np.zeros(0))


class TestQoiSummary:
    def test_collapsed_single_sample_has_zero_width(self):
        exp = _collapsed_expansion()
        spec = QoiSpec(kind="expectation", n_inner=200)
        mean, lo, hi = qoi_summary([exp], spec, s_paths=10,
                                   rng=np.random.default_rng(0))
        assert lo == mean == hi

    def test_matches_manual_pooling(self):
        sample = _stationary_sample([0.2, 0.5, 0.8], [0.3, -0.1, 0.6])
        exp = kle_build(sample, n_quad=40, beta=0.999, seed=1)
        spec = QoiSpec(kind="expectation", n_inner=150)
        rng = np.random.default_rng(5)
        inner = rng.uniform(0.0, 1.0, size=(150, 1))

        from bode.qoi import qoi_draws

        got = qoi_summary([exp, exp], spec, s_paths=12, inner_points=inner,
                          rng=np.random.default_rng(9))
        ref_rng = np.random.default_rng(9)
        pooled = np.concatenate([
            qoi_draws(exp, spec, inner, 12, ref_rng) for _ in range(2)
        ])
        assert got[0] == pytest.approx(pooled.mean(), rel=1e-12)
        assert got[1] == pytest.approx(np.percentile(pooled, 2.5), rel=1e-12)
        assert got[2] == pytest.approx(np.percentile(pooled, 97.5), rel=1e-12)

    def test_rejects_empty_posterior(self):
        with pytest.raises(ValueError):
            qoi_summary([], QoiSpec(), s_paths=5)


class TestUnstandardize:
    def test_location_kinds_shift_and_scale(self):
        out = _unstandardize_summary("expectation", (1.0, 0.5, 2.0), 3.0, 2.0)
        assert out == (5.0, 4.0, 7.0)

    def test_variance_kind_scales_quadratically(self):
        out = _unstandardize_summary("variance", (1.0, 0.5, 2.0), 3.0, 2.0)
        assert out == (4.0, 2.0, 8.0)


class TestRun:
    def test_single_cycle_when_budget_is_one(self):
        cfg = _tiny_cfg(n_max=5)
        trace = run(_smooth_oracle, cfg)
        assert trace.n_added == 1
        assert trace.dataset.n == 5

    def test_trace_well_formed_us(self):
        cfg = _tiny_cfg()
        trace = run(_smooth_oracle, cfg)
        assert isinstance(trace, CampaignTrace)
        assert trace.n_added == cfg.n_max - cfg.n_initial
        assert trace.dataset.n == cfg.n_max
        assert list(trace.column("iteration")) == [1, 2]
        for rec in trace.records:
            assert cfg.space.contains(rec.x)
            assert rec.qoi_lo <= rec.qoi_mean <= rec.qoi_hi
            assert rec.wall_ms > 0.0
            assert np.isfinite(rec.acq_value)
            assert rec.y == pytest.approx(_smooth_oracle(rec.x))

    def test_trace_well_formed_ekld(self):
        cfg = _tiny_cfg(acquisition="ekld", n_max=5)
        trace = run(_smooth_oracle, cfg)
        assert trace.n_added == 1
        assert trace.records[0].acq_value >= 0.0
        assert cfg.space.contains(trace.records[0].x)

    def test_trace_well_formed_ei(self):
        cfg = _tiny_cfg(acquisition="ei", n_max=5)
        trace = run(_smooth_oracle, cfg)
        assert trace.n_added == 1
        assert trace.records[0].acq_value >= 0.0

    def test_chosen_designs_appended_in_order(self):
        cfg = _tiny_cfg()
        trace = run(_smooth_oracle, cfg)
        added = trace.dataset.designs[cfg.n_initial:]
        np.testing.assert_array_equal(
            added, np.vstack([r.x for r in trace.records]))
        np.testing.assert_array_equal(
            trace.dataset.observations[cfg.n_initial:],
            trace.column("y"))

    def test_seed_reproducibility(self):
        cfg = _tiny_cfg(acquisition="ekld", n_max=5)
        a = run(_smooth_oracle, cfg)
        b = run(_smooth_oracle, cfg)
        np.testing.assert_array_equal(a.dataset.designs, b.dataset.designs)
        for name in ("y", "qoi_mean", "qoi_lo", "qoi_hi", "acq_value"):
            np.testing.assert_array_equal(a.column(name), b.column(name))

    def test_resume_reproduces_uninterrupted_run(self):
        cfg = _tiny_cfg()
        full = run(_smooth_oracle, cfg)
        resumed = run(_smooth_oracle, cfg,
                      init_data=_truncated(full.dataset, cfg.n_initial + 1))
        assert resumed.n_added == 1
        got, want = resumed.records[0], full.records[1]
        np.testing.assert_array_equal(got.x, want.x)
        assert got.y == want.y
        assert got.qoi_mean == want.qoi_mean
        assert got.qoi_lo == want.qoi_lo
        assert got.qoi_hi == want.qoi_hi
        assert got.acq_value == want.acq_value
        np.testing.assert_array_equal(resumed.dataset.designs,
                                      full.dataset.designs)

    def test_resume_with_sparse_refit_cadence(self):
        cfg = _tiny_cfg(refit_every=2)
        full = run(_smooth_oracle, cfg)
        resumed = run(_smooth_oracle, cfg,
                      init_data=_truncated(full.dataset, cfg.n_initial + 1))
        got, want = resumed.records[0], full.records[1]
        np.testing.assert_array_equal(got.x, want.x)
        assert got.qoi_mean == want.qoi_mean
        assert got.acq_value == want.acq_value

    def test_init_data_skips_initial_queries(self):
        calls = []

        def oracle(x):
            calls.append(np.copy(x))
            return _smooth_oracle(x)

        cfg = _tiny_cfg(n_max=5)
        rng = np.random.default_rng(2)
        init = Dataset(space=UNIT,
                       designs=rng.uniform(size=(4, 1)),
                       observations=rng.uniform(size=4),
                       noise_variance=cfg.noise_variance)
        trace = run(oracle, cfg, init_data=init)
        assert len(calls) == 1
        assert trace.dataset.n == 5
        np.testing.assert_array_equal(trace.dataset.designs[:4], init.designs)

    def test_init_data_space_mismatch_rejected(self):
        cfg = _tiny_cfg()
        other = DesignSpace(bounds=np.array([[0.0, 2.0]]))
        init = Dataset(space=other, designs=np.array([[0.5]] * 4),
                       observations=np.zeros(4))
        with pytest.raises(ValueError, match="space"):
            run(_smooth_oracle, cfg, init_data=init)

    def test_init_data_too_small_rejected(self):
        cfg = _tiny_cfg()
        init = Dataset(space=UNIT, designs=np.array([[0.5]]),
                       observations=np.zeros(1))
        with pytest.raises(ValueError, match="fewer"):
            run(_smooth_oracle, cfg, init_data=init)

    def test_on_record_sees_every_added_experiment(self):
        seen = []
        cfg = _tiny_cfg()
        run(_smooth_oracle, cfg,
            on_record=lambda rec, data: seen.append((rec.iteration, data.n)))
        assert seen == [(1, 5), (2, 6)]

    def test_oracle_failure_during_init_carries_partial_data(self):
        calls = {"n": 0}

        def oracle(x):
            calls["n"] += 1
            if calls["n"] == 3:
                raise RuntimeError("rig offline")
            return _smooth_oracle(x)

        with pytest.raises(OracleError) as excinfo:
            run(oracle, _tiny_cfg())
        assert excinfo.value.records == ()
        assert excinfo.value.dataset.n == 2

    def test_oracle_failure_mid_campaign_carries_records(self):
        calls = {"n": 0}
        cfg = _tiny_cfg()

        def oracle(x):
            calls["n"] += 1
            if calls["n"] == cfg.n_initial + 2:
                raise RuntimeError("rig offline")
            return _smooth_oracle(x)

        with pytest.raises(OracleError) as excinfo:
            run(oracle, cfg)
        assert len(excinfo.value.records) == 1
        assert excinfo.value.dataset.n == cfg.n_initial + 1

    def test_non_finite_observation_aborts(self):
        def oracle(x):
            return np.nan

        with pytest.raises(OracleError, match="non-finite"):
            run(oracle, _tiny_cfg())

    def test_standardized_fit_reports_both_scales(self):
        def offset_oracle(x):
            return 100.0 + _smooth_oracle(x)

        cfg = _tiny_cfg(standardize_outputs=True, n_max=5)
        trace = run(offset_oracle, cfg)
        rec = trace.records[0]
        assert abs(rec.qoi_mean - 100.0) < 5.0
        assert abs(rec.qoi_mean_fit) < 5.0
        assert rec.qoi_mean != rec.qoi_mean_fit

    def test_band_widths_column(self):
        cfg = _tiny_cfg()
        trace = run(_smooth_oracle, cfg)
        widths = trace.band_widths()
        assert widths.shape == (2,)
        assert np.all(widths >= 0.0)


class TestRunAccuracy:
    def test_mixture_expectation_moves_toward_truth(self):
        from bode.benchmarks import get_benchmark

        bench = get_benchmark("gaussian-mixture")
        cfg = _tiny_cfg(
            space=bench.domain,
            n_initial=4,
            n_max=9,
            acquisition="ekld",
            qoi=QoiSpec(kind="expectation", n_inner=500),
            hmc=HmcConfig(n_samples=300, burn_in=100, thin_to=8, seed=0),
            ekld=EkldConfig(m_posterior=8, b_hypothetical=8, s_paths=16),
            bgo=BgoConfig(n_init=4, n_total=10, n_candidates=128),
            kle_n_quad=100,
            seed=11,
        )
        trace = run(bench.evaluate, cfg)
        assert trace.n_added == 5
        final = trace.records[-1]
        assert final.qoi_lo <= final.qoi_mean <= final.qoi_hi
        assert abs(final.qoi_mean - 2.0) <= 1.0
