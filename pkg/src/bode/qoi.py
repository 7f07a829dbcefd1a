"""Quantities of interest of a surrogate path over the design space.

A quantity of interest (QoI) maps a function on the design space to a
scalar: its expectation or variance under a probability measure on the
inputs, an extremum, or a percentile of the pushforward distribution.
Every QoI here is evaluated by fixed-sample Monte Carlo: a set of inner
points is drawn once per campaign from the input measure and reused for
every path and every candidate design, so that score differences reflect
the paths rather than fresh sampling noise (common random numbers).

The predictive distribution of the QoI under a truncated Karhunen-Loeve
expansion is summarized by its first two moments across sampled
coefficient vectors, i.e. a Gaussian approximation of the QoI density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DesignSpace
from .kle import KleExpansion

QOI_KINDS = ("expectation", "variance", "minimum", "maximum", "percentile")
DEFAULT_N_INNER = 2000
VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class QoiSpec:
    """Which functional of the unknown function a campaign targets.

    Parameters
    ----------
    kind : str
        One of "expectation", "variance", "minimum", "maximum",
        "percentile".
    alpha : float
        Percentile level in (0, 1); only used when ``kind`` is
        "percentile".
    n_inner : int
        Number of Monte-Carlo inner points that discretize the input
        measure.
    sample_points : ndarray, optional
        Explicit sample of shape (k, dim) defining the input measure by
        (weighted) resampling.  When omitted the measure is uniform over
        the design space.
    sample_weights : ndarray, optional
        Nonnegative weights for ``sample_points``; uniform when omitted.
    """

    kind: str = "expectation"
    alpha: float = 0.025
    n_inner: int = DEFAULT_N_INNER
    sample_points: np.ndarray | None = None
    sample_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in QOI_KINDS:
            raise ValueError(
                f"unknown QoI kind {self.kind!r}; choose one of {QOI_KINDS}")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError("alpha must lie strictly inside (0, 1)")
        if int(self.n_inner) < 2:
            raise ValueError("n_inner must be at least 2")
        if self.sample_weights is not None and self.sample_points is None:
            raise ValueError("sample_weights were given without sample_points")
        if self.sample_points is not None:
            points = np.atleast_2d(np.asarray(self.sample_points, dtype=float))
            if points.size == 0 or not np.all(np.isfinite(points)):
                raise ValueError("sample_points must be nonempty and finite")
            object.__setattr__(self, "sample_points", points)
            if self.sample_weights is not None:
                weights = np.asarray(self.sample_weights, dtype=float).ravel()
                if weights.shape[0] != points.shape[0]:
                    raise ValueError(
                        "sample_weights must match sample_points in length")
                if (not np.all(np.isfinite(weights)) or np.any(weights < 0.0)
                        or weights.sum() <= 0.0):
                    raise ValueError(
                        "sample_weights must be nonnegative with positive sum")
                object.__setattr__(self, "sample_weights", weights)


@dataclass(frozen=True)
class QoiMoments:
    """Gaussian moment summary of the QoI's predictive distribution."""

    mean: float
    variance: float
    n_paths: int

    def __post_init__(self):
        if not self.variance > 0.0:
            raise ValueError("variance must be strictly positive (floored)")
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")


def draw_inner_points(spec: QoiSpec, space: DesignSpace,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw the fixed inner point set that discretizes the input measure.

    Uniform measure draws ``n_inner`` iid uniform points over the design
    space; an explicit weighted sample is resampled with replacement
    proportionally to its weights.
    """
    if spec.sample_points is None:
        return space.uniform(spec.n_inner, rng)
    points = spec.sample_points
    if spec.sample_weights is None:
        idx = rng.integers(points.shape[0], size=spec.n_inner)
    else:
        p = spec.sample_weights / spec.sample_weights.sum()
        idx = rng.choice(points.shape[0], size=spec.n_inner, p=p)
    return points[idx]


def qoi_of_values(values: np.ndarray, spec: QoiSpec):
    """Apply the QoI functional to path values at the inner points.

    Parameters
    ----------
    values : ndarray
        Path values of shape (n_inner,) for one path, or (n_inner, k)
        for k paths evaluated at the same inner points.
    spec : QoiSpec

    Returns
    -------
    float or ndarray
        One QoI value per path (scalar for a single path).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] == 0:
        raise ValueError("at least one inner point is required")
    if spec.kind == "expectation":
        out = values.mean(axis=0)
    elif spec.kind == "variance":
        if values.shape[0] < 2:
            raise ValueError("the variance QoI needs at least two inner points")
        out = values.var(axis=0, ddof=1)
    elif spec.kind == "minimum":
        out = values.min(axis=0)
    elif spec.kind == "maximum":
        out = values.max(axis=0)
    else:
        out = np.quantile(values, spec.alpha, axis=0)
    return float(out) if np.ndim(out) == 0 else out


def eval_qoi(path, spec: QoiSpec, inner_points: np.ndarray) -> float:
    """Evaluate the QoI of one path over the fixed inner point set."""
    inner_points = np.atleast_2d(np.asarray(inner_points, dtype=float))
    if inner_points.shape[0] == 0:
        raise ValueError("inner_points must be nonempty")
    values = np.asarray(path(inner_points), dtype=float).ravel()
    return float(qoi_of_values(values, spec))


def qoi_draws(exp: KleExpansion, spec: QoiSpec, inner_points: np.ndarray,
              n_paths: int, rng: np.random.Generator) -> np.ndarray:
    """QoI values of ``n_paths`` sampled surrogate paths, one per draw.

    Paths are drawn by sampling iid standard-normal coefficient vectors
    and pushing them through the expansion evaluated once at the inner
    points, so the cost is one basis evaluation regardless of n_paths.
    """
    inner_points = np.atleast_2d(np.asarray(inner_points, dtype=float))
    mean, basis = exp.basis_at(inner_points)
    xi = rng.standard_normal((exp.n_terms, n_paths))
    return np.atleast_1d(qoi_of_values(mean[:, None] + basis @ xi, spec))


def moments_from_draws(draws: np.ndarray) -> QoiMoments:
    """Sample mean and floored unbiased variance of per-path QoI values."""
    draws = np.asarray(draws, dtype=float).ravel()
    if draws.shape[0] < 2:
        raise ValueError("at least two paths are needed for moment estimates")
    return QoiMoments(mean=float(draws.mean()),
                      variance=max(float(draws.var(ddof=1)), VARIANCE_FLOOR),
                      n_paths=draws.shape[0])


def qoi_moments(exp: KleExpansion, spec: QoiSpec, n_paths: int,
                rng: np.random.Generator,
                inner_points: np.ndarray | None = None) -> QoiMoments:
    """Gaussian moment summary of the QoI under one posterior sample.

    Parameters
    ----------
    exp : KleExpansion
        Truncated expansion of the conditional GP for one posterior
        sample of the surrogate.
    spec : QoiSpec
    n_paths : int
        Number S of coefficient draws; at least 2.
    rng : numpy.random.Generator
    inner_points : ndarray, optional
        Fixed inner point set; drawn from the input measure when omitted.

    Returns
    -------
    QoiMoments
        Sample mean and unbiased sample variance of the per-path QoI
        values, the variance floored at 1e-12 so downstream divergence
        computations stay finite when the posterior has collapsed.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    if inner_points is None:
        inner_points = draw_inner_points(spec, exp.sample.data.space, rng)
    return moments_from_draws(qoi_draws(exp, spec, inner_points, n_paths, rng))
