"""Design space description and space-filling sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class DesignSpace:
    """Axis-aligned box of admissible experiment inputs.

    Parameters
    ----------
    bounds : ndarray, shape (dim, 2)
        Per-dimension (lower, upper) limits with lower < upper.
    """

    bounds: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        if b.ndim != 2 or b.shape[1] != 2:
            raise ValueError(f"bounds must have shape (dim, 2), got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("bounds must be finite")
        if not np.all(b[:, 0] < b[:, 1]):
            raise ValueError("each lower bound must be strictly below its upper bound")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self) -> int:
        return self.bounds.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]

    def contains(self, x: np.ndarray, atol: float = 1e-12) -> bool:
        """Whether the point (or every row of a batch) lies inside the box."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return bool(
            np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol)
        )

    def uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n i.i.d. uniform draws over the box, shape (n, dim)."""
        u = rng.random((n, self.dim))
        return qmc.scale(u, self.lower, self.upper)


def lhs(n: int, space: DesignSpace, seed: int) -> np.ndarray:
    """Latin hypercube sample of ``n`` points over ``space``.

    Each one-dimensional projection places exactly one point in each of the
    ``n`` equal-width strata.  Deterministic for a fixed ``seed``.

    Returns
    -------
    ndarray, shape (n, space.dim)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sampler = qmc.LatinHypercube(d=space.dim, seed=seed)
    return qmc.scale(sampler.random(n), space.lower, space.upper)
