"""Unit tests for the non-stationary product kernel and the latent SE kernel."""

import numpy as np
import pytest

from bode.kernels import (
    gibbs_covariance,
    gibbs_cross,
    gibbs_matrix,
    latent_se_covariance,
    se_cross,
)


def _const(d, value):
    return np.full(d, float(value))


class TestGibbsCovariance:
    def test_diagonal_unit_fields(self):
        """k(x, x) with s = l = 1 equals 1/sqrt(2) in one dimension."""
        k = gibbs_covariance([0.3], [0.3], [1.0], [1.0], [1.0], [1.0])
        np.testing.assert_allclose(k, 1.0 / np.sqrt(2.0), rtol=1e-15)

    def test_diagonal_scaled_fields(self):
        """k(0, 0) with s = 2, l = 0.5 equals 4/sqrt(2)."""
        k = gibbs_covariance([0.0], [0.0], [2.0], [2.0], [0.5], [0.5])
        np.testing.assert_allclose(k, 4.0 / np.sqrt(2.0), rtol=1e-15)

    def test_two_dims_hand_evaluated(self):
        """d=2 unit fields at (0,0) vs (1,0): product of per-dimension factors."""
        k = gibbs_covariance(
            [0.0, 0.0], [1.0, 0.0],
            _const(2, 1), _const(2, 1), _const(2, 1), _const(2, 1),
        )
        np.testing.assert_allclose(k, np.exp(-0.5) / 2.0, rtol=1e-12)

    def test_symmetry(self):
        """Swapping the two points (with their fields) leaves k unchanged."""
        rng = np.random.default_rng(42)
        for _ in range(50):
            d = rng.integers(1, 4)
            x, x2 = rng.random(d), rng.random(d)
            s1, s2 = rng.uniform(0.5, 2, d), rng.uniform(0.5, 2, d)
            l1, l2 = rng.uniform(0.1, 1, d), rng.uniform(0.1, 1, d)
            k12 = gibbs_covariance(x, x2, s1, s2, l1, l2)
            k21 = gibbs_covariance(x2, x, s2, s1, l2, l1)
            assert k12 == k21

    def test_stationary_reduction(self):
        """Constant fields collapse to (s^{2d}/2^{d/2}) exp(-sum d_i^2/(2 l^2))."""
        rng = np.random.default_rng(7)
        for d in (1, 2, 3):
            s, l = 1.4, 0.35
            x, x2 = rng.random(d), rng.random(d)
            k = gibbs_covariance(x, x2, _const(d, s), _const(d, s),
                                 _const(d, l), _const(d, l))
            expected = (
                s ** (2 * d) / 2.0 ** (d / 2.0)
                * np.exp(-np.sum((x - x2) ** 2) / (2.0 * l**2))
            )
            np.testing.assert_allclose(k, expected, rtol=1e-12)

    def test_normalized_switch_restores_unit_diagonal(self):
        """With normalized=True the diagonal is prod_i s_i^2 exactly."""
        k = gibbs_covariance([0.2, 0.8], [0.2, 0.8],
                             [1.5, 0.5], [1.5, 0.5],
                             [0.3, 0.3], [0.3, 0.3], normalized=True)
        np.testing.assert_allclose(k, (1.5 * 0.5) ** 2, rtol=1e-12)

    def test_rejects_nonpositive_fields(self):
        with pytest.raises(ValueError):
            gibbs_covariance([0.0], [1.0], [1.0], [0.0], [1.0], [1.0])
        with pytest.raises(ValueError):
            gibbs_covariance([0.0], [1.0], [1.0], [1.0], [-0.5], [1.0])

    def test_positive_definite_before_jitter(self):
        """Random fields on 20 random points give min eigenvalue > -1e-8."""
        rng = np.random.default_rng(3)
        for d in (1, 3):
            x = rng.random((20, d))
            s = rng.uniform(0.5, 2.0, (20, d))
            l = rng.uniform(0.1, 0.8, (20, d))
            k = gibbs_matrix(x, s, l)
            np.testing.assert_allclose(k, k.T, atol=1e-14)
            assert np.linalg.eigvalsh(k).min() > -1e-8

    def test_cross_matches_scalar(self):
        """The batched cross-covariance agrees with the scalar evaluation."""
        rng = np.random.default_rng(11)
        x1, x2 = rng.random((4, 2)), rng.random((3, 2))
        s1, s2 = rng.uniform(0.5, 2, (4, 2)), rng.uniform(0.5, 2, (3, 2))
        l1, l2 = rng.uniform(0.2, 1, (4, 2)), rng.uniform(0.2, 1, (3, 2))
        big = gibbs_cross(x1, s1, l1, x2, s2, l2)
        for p in range(4):
            for q in range(3):
                np.testing.assert_allclose(
                    big[p, q],
                    gibbs_covariance(x1[p], x2[q], s1[p], s2[q], l1[p], l2[q]),
                    rtol=1e-14,
                )


class TestLatentSeCovariance:
    def test_diagonal(self):
        """k(t, t) equals the squared amplitude."""
        assert latent_se_covariance(0.4, 0.4, (-2.0, 3.0, 1.0)) == 9.0

    def test_unit_hyperparams(self):
        np.testing.assert_allclose(
            latent_se_covariance(0.0, 1.0, (0.0, 1.0, 1.0)), np.exp(-0.5),
            rtol=1e-15,
        )

    def test_hand_evaluated(self):
        """v=2, ell=2 at distance 2 gives 4 e^{-0.5}."""
        np.testing.assert_allclose(
            latent_se_covariance(0.0, 2.0, (0.0, 2.0, 2.0)),
            4.0 * np.exp(-0.5), rtol=1e-14,
        )

    def test_rejects_nonpositive_hyperparams(self):
        with pytest.raises(ValueError):
            latent_se_covariance(0.0, 1.0, (0.0, -1.0, 1.0))
        with pytest.raises(ValueError):
            latent_se_covariance(0.0, 1.0, (0.0, 1.0, 0.0))

    def test_cross_shape_and_symmetry(self):
        t = np.linspace(0, 1, 5)
        k = se_cross(t, t, 1.3, 0.4)
        assert k.shape == (5, 5)
        np.testing.assert_allclose(k, k.T, atol=0)
