"""Acquisition scores that rank candidate experiments.

The primary score is the expected Kullback-Leibler divergence (EKLD): how
much a hypothetical observation at a candidate design is expected to move
the predictive distribution of the quantity of interest, averaged over
posterior samples of the surrogate and over hypothetical outcomes drawn
from each sample's own predictive law.  Uncertainty sampling and expected
improvement are provided as baselines.

Common random numbers make the EKLD surface smooth in the candidate: one
sweep fixes the inner points, the path coefficients Z (per posterior
sample) and the hypothetical-outcome draws, and reuses them for every
candidate.  Conditioned paths are generated as mu_b + A Z with the exact
symmetric square root A of the rank-one-downdate covariance, so a
candidate that carries no information reproduces the prior paths exactly
and scores zero instead of Monte-Carlo noise.

Random streams are derived from the sweep seed and the posterior-sample
index only, never from the candidate, so scoring candidates in any order
or concurrently yields identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .kle import KleExpansion
from .nsgp import DEFAULT_NOISE_VARIANCE, Dataset, PosteriorSample, conditional_predict
from .qoi import QoiMoments, QoiSpec, draw_inner_points, moments_from_draws, qoi_of_values
from .seeds import rng_for


@dataclass(frozen=True)
class EkldConfig:
    """Sample counts of the nested EKLD estimator.

    Parameters
    ----------
    m_posterior : int
        Number M of posterior surrogate samples scored (the campaign
        thins its chain to this many).
    b_hypothetical : int
        Number B of hypothetical outcomes per posterior sample.
    s_paths : int
        Number S of surrogate paths behind each moment estimate.
    seed : int
        Sweep seed from which all internal streams are derived.
    """

    m_posterior: int = 50
    b_hypothetical: int = 50
    s_paths: int = 50
    seed: int = 0

    def __post_init__(self):
        for name in ("m_posterior", "b_hypothetical", "s_paths"):
            if int(getattr(self, name)) < 2:
                raise ValueError(f"{name} must be at least 2")

    @classmethod
    def desk_scale(cls, **overrides) -> "EkldConfig":
        """Reduced counts for interactive runs and the test suite."""
        defaults = dict(m_posterior=20, b_hypothetical=20, s_paths=20)
        defaults.update(overrides)
        return cls(**defaults)


@dataclass(frozen=True)
class AcquisitionScore:
    """EKLD score of one candidate with its per-sample breakdown.

    ``per_sample[m]`` is the hypothetical-outcome average of the KL
    divergence under posterior sample m; ``value`` is the mean over
    samples.  ``prior_moments`` and ``conditioned_moments`` hold, per
    sample, the current QoI moment summary and the average of the
    post-hypothetical summaries (diagnostics).
    """

    value: float
    per_sample: np.ndarray
    prior_moments: tuple
    conditioned_moments: tuple

    def __post_init__(self):
        per_sample = np.asarray(self.per_sample, dtype=float).ravel()
        object.__setattr__(self, "per_sample", per_sample)
        if not np.isclose(self.value, per_sample.mean(), rtol=1e-9, atol=1e-12):
            raise ValueError("value must equal the mean of per_sample")


def kld_gaussians(mu1: float, sd1: float, mu2: float, sd2: float) -> float:
    """Kullback-Leibler divergence between two univariate Gaussians.

    Measured with the current (first) distribution's variance in the
    denominators:

        log(sd1/sd2) + sd2^2/(2 sd1^2) + (mu2 - mu1)^2/(2 sd1^2) - 1/2.

    Nonnegative, zero exactly when the moments coincide.
    """
    if not (sd1 > 0.0 and sd2 > 0.0):
        raise ValueError("standard deviations must be strictly positive")
    value = (np.log(sd1 / sd2) + sd2 ** 2 / (2.0 * sd1 ** 2)
             + (mu2 - mu1) ** 2 / (2.0 * sd1 ** 2) - 0.5)
    return max(float(value), 0.0)


def _expansion_of(item) -> KleExpansion:
    return item[-1] if isinstance(item, (tuple, list)) else item


def _sample_of(item) -> PosteriorSample:
    return item[0] if isinstance(item, (tuple, list)) else item


class EkldSweep:
    """Scores many candidates against one fixed posterior ensemble.

    Precomputes, per posterior sample, the expansion basis at the inner
    points, the common path coefficients Z of shape (W, S), and the
    hypothetical-outcome draws; ``score`` then costs one basis evaluation
    at the candidate plus closed-form conditioning.

    Parameters
    ----------
    posterior : sequence
        KleExpansion per posterior sample (bare, or (sample, expansion)
        pairs).
    spec : QoiSpec
    cfg : EkldConfig
    inner_points : ndarray
        Fixed inner point set shared by the whole campaign.
    noise_variance : float
        Observation noise of the hypothetical experiment.
    """

    def __init__(self, posterior, spec: QoiSpec, cfg: EkldConfig,
                 inner_points: np.ndarray,
                 noise_variance: float = DEFAULT_NOISE_VARIANCE):
        expansions = [_expansion_of(item) for item in posterior]
        if not expansions:
            raise ValueError("posterior must be nonempty")
        if not noise_variance > 0.0:
            raise ValueError("noise_variance must be strictly positive")
        self.spec = spec
        self.cfg = cfg
        self.noise_variance = float(noise_variance)
        self.inner_points = np.atleast_2d(np.asarray(inner_points, dtype=float))
        self.expansions = expansions

        self._means = []
        self._bases = []
        self._paths_z = []
        self._hyp_coeffs = []
        self._hyp_noise = []
        prior = []
        for m, exp in enumerate(expansions):
            mean, basis = exp.basis_at(self.inner_points)
            z = rng_for(cfg.seed, "paths", m).standard_normal(
                (exp.n_terms, cfg.s_paths))
            rng_h = rng_for(cfg.seed, "hypothetical", m)
            coeffs = rng_h.standard_normal((exp.n_terms, cfg.b_hypothetical))
            noise = rng_h.standard_normal(cfg.b_hypothetical) * np.sqrt(
                self.noise_variance)
            self._means.append(mean)
            self._bases.append(basis)
            self._paths_z.append(z)
            self._hyp_coeffs.append(coeffs)
            self._hyp_noise.append(noise)
            prior.append(moments_from_draws(
                qoi_of_values(mean[:, None] + basis @ z, spec)))
        self.prior_moments = tuple(prior)

    @property
    def n_samples(self) -> int:
        return len(self.expansions)

    def _features(self, x_new: np.ndarray):
        """Per-sample (mean, scaled eigenfunction vector) at the candidate."""
        x = np.atleast_2d(np.asarray(x_new, dtype=float))
        out = []
        for exp in self.expansions:
            mean, basis = exp.basis_at(x)
            out.append((float(mean[0]), basis[0]))
        return out

    def hypothetical_outcomes(self, x_new: np.ndarray) -> np.ndarray:
        """The (n_samples, B) hypothetical observations used at ``x_new``."""
        rows = []
        for m, (w0, a) in enumerate(self._features(x_new)):
            rows.append(w0 + a @ self._hyp_coeffs[m] + self._hyp_noise[m])
        return np.asarray(rows)

    def score(self, x_new: np.ndarray) -> AcquisitionScore:
        """EKLD of a hypothetical experiment at ``x_new``."""
        cfg = self.cfg
        per_sample = np.empty(self.n_samples)
        conditioned = []
        for m, (w0, a) in enumerate(self._features(x_new)):
            mean, basis = self._means[m], self._bases[m]
            z = self._paths_z[m]
            prior = self.prior_moments[m]
            q = float(a @ a)
            s2 = self.noise_variance + q

            residuals = a @ self._hyp_coeffs[m] + self._hyp_noise[m]
            if q > 0.0:
                gamma = (1.0 - np.sqrt(self.noise_variance / s2)) / q
                factored_z = z - gamma * np.outer(a, a @ z)
            else:
                factored_z = z
            base = mean[:, None] + basis @ factored_z
            gain = (basis @ a) / s2

            klds = np.empty(cfg.b_hypothetical)
            cond_mean = 0.0
            cond_var = 0.0
            for b in range(cfg.b_hypothetical):
                draws = qoi_of_values(base + gain[:, None] * residuals[b],
                                      self.spec)
                cond = moments_from_draws(draws)
                klds[b] = kld_gaussians(prior.mean, np.sqrt(prior.variance),
                                        cond.mean, np.sqrt(cond.variance))
                cond_mean += cond.mean
                cond_var += cond.variance
            per_sample[m] = klds.mean()
            conditioned.append(QoiMoments(
                mean=cond_mean / cfg.b_hypothetical,
                variance=cond_var / cfg.b_hypothetical,
                n_paths=cfg.s_paths))
        return AcquisitionScore(
            value=float(per_sample.mean()),
            per_sample=per_sample,
            prior_moments=self.prior_moments,
            conditioned_moments=tuple(conditioned),
        )


def ekld_score(x_new, posterior, spec: QoiSpec, cfg: EkldConfig, data: Dataset,
               inner_points: np.ndarray | None = None) -> AcquisitionScore:
    """Score one candidate; see ``EkldSweep`` for the sweep version."""
    if inner_points is None:
        inner_points = draw_inner_points(spec, data.space,
                                         rng_for(cfg.seed, "inner"))
    sweep = EkldSweep(posterior, spec, cfg, inner_points,
                      noise_variance=data.noise_variance)
    return sweep.score(x_new)


def us_score(x_new, posterior, data: Dataset) -> float:
    """Uncertainty sampling: posterior-mean predictive variance at ``x_new``."""
    samples = [_sample_of(item) for item in posterior]
    if not samples:
        raise ValueError("posterior must be nonempty")
    return float(np.mean([
        conditional_predict(x_new, s, data)[1] for s in samples
    ]))


def expected_improvement(mean: float, sd: float, best: float) -> float:
    """Closed-form E[max(best - Y, 0)] for Y ~ N(mean, sd^2)."""
    if sd <= 0.0:
        return max(best - mean, 0.0)
    z = (best - mean) / sd
    return max(float((best - mean) * norm.cdf(z) + sd * norm.pdf(z)), 0.0)


def ei_score(x_new, posterior, data: Dataset, best: float) -> float:
    """Expected improvement below ``best``, posterior-averaged."""
    samples = [_sample_of(item) for item in posterior]
    if not samples:
        raise ValueError("posterior must be nonempty")
    values = []
    for s in samples:
        mean, var = conditional_predict(x_new, s, data)
        values.append(expected_improvement(mean, np.sqrt(max(var, 0.0)), best))
    return float(np.mean(values))
