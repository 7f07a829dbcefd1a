"""Global maximization of a noisy, expensive score over the design space.

The acquisition surfaces this package produces (notably the EKLD) are
Monte-Carlo noisy and cost a nontrivial amount per evaluation, so the
inner optimizer is itself a small Bayesian optimization loop: seed the
score at a Latin hypercube design, fit a stationary GP meta-model with a
learned observation-noise level, and repeatedly evaluate the candidate
maximizing the augmented expected improvement (AEI) over a fresh
candidate cloud.  AEI discounts plain expected improvement by
1 - sd_noise/sqrt(s^2 + sd_noise^2), which keeps the loop from chasing
replication noise, and measures improvement against the GP mean at the
evaluated point maximizing mean - sd (the "effective best").

The returned maximizer is always one of the actually evaluated points
(the observed argmax), never a GP-mean argmax.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm
from sklearn.exceptions import ConvergenceWarning
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import RBF, ConstantKernel, WhiteKernel

from .design import DesignSpace, lhs
from .seeds import int_for, rng_for


@dataclass(frozen=True)
class BgoConfig:
    """Budget and tolerances of the inner optimization loop.

    Parameters
    ----------
    n_init : int
        Latin hypercube evaluations seeding the meta-model.
    n_total : int
        Total score evaluations allowed (seed phase included).
    n_candidates : int
        Candidate cloud size per sweep.
    tol : float
        Early-stop threshold: stop once the best AEI falls below
        ``tol`` times the absolute best observed score.
    seed : int
    """

    n_init: int = 10
    n_total: int = 30
    n_candidates: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        if not self.n_init < self.n_total:
            raise ValueError("n_init must be smaller than n_total")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be at least 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be strictly positive")

    @classmethod
    def for_dim(cls, dim: int, **overrides) -> "BgoConfig":
        """Dimension-dependent default budget (30 in 1-D, else 40)."""
        defaults = dict(n_total=30 if dim == 1 else 40)
        defaults.update(overrides)
        return cls(**defaults)


@dataclass(frozen=True)
class BgoTrace:
    """Everything the inner loop evaluated, in evaluation order."""

    points: np.ndarray     # (n_evals, dim)
    scores: np.ndarray     # (n_evals,)
    n_init: int
    max_aei: np.ndarray    # best AEI per adaptive sweep, score units
    fallback: np.ndarray   # sweeps where the meta-model fit failed
    stopped_early: bool

    @property
    def best_index(self) -> int:
        """Index of the observed argmax (ties broken by first index)."""
        return int(np.argmax(self.scores))


def _fit_meta_model(x_unit: np.ndarray, g: np.ndarray, seed: int):
    """Stationary-GP fit of standardized scores; returns (mu, sd, sd_noise).

    The first regressor learns amplitude, lengthscales and a white noise
    level by marginal likelihood (5 restarts); a second one reuses the
    fitted kernel without the white term, with the learned noise as
    ``alpha``, so its predictive standard deviation is that of the latent
    score surface rather than of a noisy replicate.
    """
    dim = x_unit.shape[1]
    kernel = (
        ConstantKernel(1.0, (1e-3, 1e3))
        * RBF(np.full(dim, 0.3), (1e-2, 1e2))
        + WhiteKernel(1e-2, (1e-10, 1e1))
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        gpr = GaussianProcessRegressor(
            kernel=kernel, n_restarts_optimizer=4, normalize_y=False,
            random_state=seed,
        ).fit(x_unit, g)
        noise = float(gpr.kernel_.k2.noise_level)
        latent = GaussianProcessRegressor(
            kernel=gpr.kernel_.k1, optimizer=None, alpha=noise + 1e-12,
            normalize_y=False,
        ).fit(x_unit, g)

    def predict(points_unit):
        mu, sd = latent.predict(points_unit, return_std=True)
        return mu, sd

    return predict, np.sqrt(noise)


def _aei(mu: np.ndarray, sd: np.ndarray, best: float, sd_noise: float):
    """Augmented expected improvement toward larger values."""
    sd = np.maximum(sd, 0.0)
    improve = mu - best
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0.0, improve / np.where(sd > 0.0, sd, 1.0), 0.0)
        ei = np.where(
            sd > 0.0,
            improve * norm.cdf(z) + sd * norm.pdf(z),
            np.maximum(improve, 0.0),
        )
    penalty = 1.0 - sd_noise / np.sqrt(sd ** 2 + sd_noise ** 2) \
        if sd_noise > 0.0 else np.ones_like(sd)
    return np.maximum(ei * penalty, 0.0)


def maximize(score_fn, space: DesignSpace, cfg: BgoConfig):
    """Find the observed argmax of ``score_fn`` within the evaluation budget.

    Parameters
    ----------
    score_fn : callable
        Maps a point (dim,) to a finite float.
    space : DesignSpace
    cfg : BgoConfig

    Returns
    -------
    (x_star, trace)
        ``x_star`` is the evaluated point with the highest observed
        score; ``trace`` records every evaluation, the per-sweep best
        AEI, meta-model fit failures (which fall back to picking a
        random candidate for that sweep), and whether the loop stopped
        early.
    """
    span = space.upper - space.lower

    def evaluate(x):
        value = float(score_fn(x))
        if not np.isfinite(value):
            raise ValueError(f"score_fn returned a non-finite value at {x}")
        return value

    points = list(lhs(cfg.n_init, space, seed=int_for(cfg.seed, "init")))
    scores = [evaluate(x) for x in points]

    max_aei: list[float] = []
    fallback: list[bool] = []
    stopped_early = False
    sweep = 0
    while len(points) < cfg.n_total:
        x_arr = np.asarray(points)
        g_arr = np.asarray(scores)
        shift, scale = g_arr.mean(), max(g_arr.std(), 1e-12)
        x_unit = (x_arr - space.lower) / span
        candidates = lhs(cfg.n_candidates, space,
                         seed=int_for(cfg.seed, "candidates", sweep))
        cand_unit = (candidates - space.lower) / span

        failed = False
        try:
            predict, sd_noise = _fit_meta_model(
                x_unit, (g_arr - shift) / scale,
                seed=int_for(cfg.seed, "fit", sweep))
            mu_obs, sd_obs = predict(x_unit)
            best = mu_obs[int(np.argmax(mu_obs - sd_obs))]
            mu, sd = predict(cand_unit)
            aei = _aei(mu, sd, best, sd_noise) * scale
        except Exception:
            failed = True
        fallback.append(failed)

        if failed:
            pick = int(rng_for(cfg.seed, "fallback", sweep).integers(
                candidates.shape[0]))
            max_aei.append(np.nan)
        else:
            pick = int(np.argmax(aei))
            max_aei.append(float(aei[pick]))
            if aei[pick] < cfg.tol * abs(g_arr.max()) + 1e-300:
                stopped_early = True
                break
        points.append(candidates[pick])
        scores.append(evaluate(candidates[pick]))
        sweep += 1

    trace = BgoTrace(
        points=np.asarray(points),
        scores=np.asarray(scores),
        n_init=cfg.n_init,
        max_aei=np.asarray(max_aei),
        fallback=np.asarray(fallback, dtype=bool),
        stopped_early=stopped_early,
    )
    return trace.points[trace.best_index], trace
