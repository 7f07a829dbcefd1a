"""Tests for the benchmark functions, their oracles, and LHS designs."""

import numpy as np
import pytest

from bode.benchmarks import (
    BENCHMARKS,
    compare,
    Benchmark,
    benchmark_fn,
    get_benchmark,
    global_moments,
    oracle_qoi,
)
from bode.design import DesignSpace, lhs
from bode.qoi import QoiSpec


class TestBenchmarkFn:
    def test_mixture_peak_value(self):
        # At the first bump's center the second bump contributes ~1e-16.
        assert benchmark_fn("gaussian-mixture", np.array([0.2])) == \
            pytest.approx(7.978845608028654, abs=1e-9)

    def test_friedman_at_origin(self):
        value = benchmark_fn("shifted-friedman", np.zeros(5))
        assert value == 500.0

    def test_chirp_zero_where_phase_hits_quarter_turn(self):
        # 6x + 8 exp(6x - 7) = pi/2 at this root, so 4(1 - sin) = 0.
        x = 0.2561456807990712
        assert benchmark_fn("sine-chirp", np.array([x])) == \
            pytest.approx(0.0, abs=1e-9)

    def test_batch_matches_single(self):
        pts = np.array([[0.1], [0.5], [0.77]])
        batch = benchmark_fn("sine-chirp", pts)
        singles = [benchmark_fn("sine-chirp", p) for p in pts]
        np.testing.assert_allclose(batch, singles, rtol=1e-15)

    def test_out_of_domain_rejected(self):
        with pytest.raises(ValueError, match="domain"):
            benchmark_fn("gaussian-mixture", np.array([1.2]))
        with pytest.raises(ValueError, match="domain"):
            benchmark_fn("curved-valley", np.array([0.0, 0.0, 6.5]))

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ValueError, match="dimensional"):
            benchmark_fn("curved-valley", np.array([0.5, 0.5]))

    def test_unknown_name_lists_available(self):
        with pytest.raises(ValueError, match="gaussian-mixture"):
            get_benchmark("nope")

    @pytest.mark.parametrize("name", sorted(BENCHMARKS))
    def test_finite_on_domain(self, name):
        bench = BENCHMARKS[name]
        rng = np.random.default_rng(1)
        pts = bench.domain.uniform(200, rng)
        values = bench.evaluate(pts)
        assert np.all(np.isfinite(values))
        # corners included (the 3-D case must stay real at x3 = -2)
        corners = np.stack([bench.domain.lower, bench.domain.upper])
        assert np.all(np.isfinite(bench.evaluate(corners)))


class TestOracleQoi:
    def test_mixture_expectation(self):
        value = oracle_qoi("gaussian-mixture", QoiSpec(kind="expectation"))
        assert value == pytest.approx(2.0, abs=0.001)

    def test_mixture_variance(self):
        value = oracle_qoi("gaussian-mixture", QoiSpec(kind="variance"))
        assert value == pytest.approx(7.283792, abs=0.01)

    def test_constant_function(self):
        const = Benchmark(
            name="const",
            fn=lambda x: np.full(x.shape[0], 3.0),
            domain=DesignSpace(bounds=[[0.0, 1.0]]),
            standardize=False,
            reference_qois={},
        )
        assert oracle_qoi(const, QoiSpec(kind="expectation"), n_oracle=1000) == 3.0
        assert oracle_qoi(const, QoiSpec(kind="variance"), n_oracle=1000) == 0.0

    @pytest.mark.parametrize("name", [n for n, b in BENCHMARKS.items()
                                      if b.standardize])
    def test_standardized_moments_are_zero_one(self, name):
        n = 200_000
        assert oracle_qoi(name, QoiSpec(kind="expectation"), n_oracle=n) == \
            pytest.approx(0.0, abs=1e-10)
        assert oracle_qoi(name, QoiSpec(kind="variance"), n_oracle=n) == \
            pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("name", sorted(BENCHMARKS))
    def test_reference_table_consistent_with_oracle(self, name):
        bench = BENCHMARKS[name]
        n = 400_000
        for kind, (ref, tag) in bench.reference_qois.items():
            assert tag in ("analytic", "oracle")
            fresh = oracle_qoi(name, QoiSpec(kind=kind, alpha=0.025), n_oracle=n)
            tol = 0.3 if kind in ("minimum", "maximum") else 0.02
            assert fresh == pytest.approx(ref, abs=tol), (name, kind)

    def test_seeded_determinism(self):
        spec = QoiSpec(kind="percentile", alpha=0.025)
        a = oracle_qoi("curved-valley", spec, n_oracle=50_000, seed=4)
        b = oracle_qoi("curved-valley", spec, n_oracle=50_000, seed=4)
        assert a == b


class TestGlobalMoments:
    def test_mixture_moments(self):
        mean, sd = global_moments("gaussian-mixture")
        assert mean == pytest.approx(2.0, abs=0.001)
        assert sd == pytest.approx(2.698897, abs=0.001)


class TestLhs:
    def test_one_point_per_quartile(self):
        space = DesignSpace(bounds=[[0.0, 1.0]])
        pts = lhs(4, space, seed=0)[:, 0]
        counts, _ = np.histogram(pts, bins=np.linspace(0.0, 1.0, 5))
        np.testing.assert_array_equal(counts, [1, 1, 1, 1])

    def test_marginal_deciles_in_five_dimensions(self):
        space = DesignSpace(bounds=[[0.0, 1.0]] * 5)
        pts = lhs(10, space, seed=3)
        for j in range(5):
            counts, _ = np.histogram(pts[:, j], bins=np.linspace(0, 1, 11))
            np.testing.assert_array_equal(counts, np.ones(10))

    def test_stratification_on_scaled_bounds(self):
        space = DesignSpace(bounds=[[-4.0, 4.0], [10.0, 30.0]])
        pts = lhs(8, space, seed=7)
        for j, (lo, hi) in enumerate([(-4.0, 4.0), (10.0, 30.0)]):
            counts, _ = np.histogram(pts[:, j], bins=np.linspace(lo, hi, 9))
            np.testing.assert_array_equal(counts, np.ones(8))

    def test_seed_determinism(self):
        space = DesignSpace(bounds=[[0.0, 1.0]] * 2)
        np.testing.assert_array_equal(lhs(6, space, 11), lhs(6, space, 11))
        assert not np.array_equal(lhs(6, space, 11), lhs(6, space, 12))


def _tiny_template(**overrides):
    """Minimal campaign template for comparison-harness tests."""
    from bode.acquisition import EkldConfig
    from bode.bgo import BgoConfig
    from bode.campaign import CampaignConfig
    from bode.hmc import HmcConfig

    defaults = dict(
        space=DesignSpace(bounds=[[0.0, 1.0]]),
        n_initial=4,
        n_max=6,
        qoi=QoiSpec(kind="expectation", n_inner=300),
        hmc=HmcConfig(n_samples=120, burn_in=40, thin_to=8),
        ekld=EkldConfig(m_posterior=4, b_hypothetical=4, s_paths=8),
        bgo=BgoConfig(n_init=3, n_total=5, n_candidates=64),
        kle_n_quad=50,
        seed=3,
    )
    defaults.update(overrides)
    return CampaignConfig(**defaults)


class TestCompare:
    def test_single_cell_single_replication(self):
        report = compare(["gaussian-mixture"], ["us"], 1,
                         cfg=_tiny_template(), n_oracle=50_000)
        assert len(report.rows) == report.n_iterations == 2
        assert len(report.traces[("gaussian-mixture", "us")]) == 1
        assert report.failures == ()
        assert report.references["gaussian-mixture"] == pytest.approx(
            2.0, abs=0.01)
        for row in report.rows:
            assert row.n_replications == 1
            assert row.median_abs_error == row.q25_abs_error
            assert row.median_abs_error == row.q75_abs_error
            assert np.isfinite(row.median_abs_error)

    def test_row_count_is_cells_times_iterations(self):
        report = compare(["gaussian-mixture"], ["us", "ei"], 1,
                         cfg=_tiny_template(), n_oracle=50_000)
        assert len(report.rows) == 1 * 2 * 2
        assert set(report.traces) == {("gaussian-mixture", "us"),
                                      ("gaussian-mixture", "ei")}
        assert len(report.rows_for("gaussian-mixture", "ei")) == 2

    def test_replications_use_distinct_seeds(self):
        report = compare(["gaussian-mixture"], ["us"], 2,
                         cfg=_tiny_template(), n_oracle=50_000)
        a, b = report.traces[("gaussian-mixture", "us")]
        assert not np.array_equal(a.dataset.designs, b.dataset.designs)
        errs = report.errors[("gaussian-mixture", "us")]
        assert errs.shape == (2, 2)
        assert np.all(np.isfinite(errs))
        np.testing.assert_allclose(report.final_errors(
            "gaussian-mixture", "us"), errs[:, -1])

    def test_standardized_benchmark_compares_on_standard_scale(self):
        report = compare(["sine-chirp"], ["us"], 1,
                         cfg=_tiny_template(), n_oracle=50_000)
        # Global standardization pins the expectation reference at zero.
        assert report.references["sine-chirp"] == pytest.approx(0.0, abs=1e-12)
        assert np.all(report.errors[("sine-chirp", "us")] < 5.0)

    def test_campaign_failure_leaves_cell_incomplete(self, monkeypatch):
        import bode.campaign

        def broken_run(oracle, cfg, init_data=None, on_record=None):
            raise RuntimeError("synthetic breakage")

        monkeypatch.setattr(bode.campaign, "run", broken_run)
        report = compare(["gaussian-mixture"], ["us"], 2,
                         cfg=_tiny_template(), n_oracle=50_000)
        assert len(report.failures) == 2
        assert report.failures[0][:2] == ("gaussian-mixture", "us")
        assert len(report.rows) == 2
        for row in report.rows:
            assert row.n_replications == 0
            assert np.isnan(row.median_abs_error)

    def test_rejects_degenerate_study(self):
        with pytest.raises(ValueError):
            compare(["gaussian-mixture"], ["us"], 0, cfg=_tiny_template())
        with pytest.raises(ValueError):
            compare([], ["us"], 1, cfg=_tiny_template())
