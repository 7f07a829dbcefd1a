"""Dense linear-algebra helpers shared by the surrogate and sampler code."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, cholesky


class PositiveDefiniteError(np.linalg.LinAlgError):
    """Matrix stayed non positive definite after the maximum jitter.

    Attributes
    ----------
    jitter : float
        The largest diagonal jitter that was attempted before giving up.
    """

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


def jitter_cholesky(a: np.ndarray, rel_start: float = 1e-8, rel_max: float = 1e-4):
    """Lower Cholesky factor of ``a``, adding diagonal jitter on failure.

    Jitter starts at ``rel_start * mean(diag(a))`` and doubles until the
    factorization succeeds or it exceeds ``rel_max * mean(diag(a))``.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        Symmetric matrix expected to be positive (semi-)definite.

    Returns
    -------
    lower : ndarray, shape (n, n)
        Lower-triangular factor with ``lower @ lower.T == a + jitter * I``.
    jitter : float
        Diagonal jitter that was actually added (0.0 when none was needed).

    Raises
    ------
    PositiveDefiniteError
        If the factorization keeps failing at the maximum jitter.
    """
    if a.size == 0:
        return np.zeros_like(a), 0.0
    try:
        return cholesky(a, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass

    scale = float(np.mean(np.diag(a)))
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    jitter = rel_start * scale
    max_jitter = rel_max * scale
    if jitter <= 0.0:
        # The diagonal is so far below machine resolution that the starting
        # jitter underflows to exactly zero, which would double to zero
        # forever; such a matrix is numerically indefinite at this precision.
        raise PositiveDefiniteError(
            f"matrix of shape {a.shape} has diagonal scale {scale:.3e}, "
            "below the resolution of any positive jitter",
            jitter=0.0,
        )
    eye = np.eye(a.shape[0])
    while jitter <= max_jitter:
        try:
            return cholesky(a + jitter * eye, lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise PositiveDefiniteError(
        f"matrix of shape {a.shape} not positive definite at jitter {jitter:.3e}",
        jitter=jitter,
    )


def chol_solve(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` given the lower Cholesky factor of ``A``."""
    if lower.size == 0:
        return np.zeros_like(b)
    return cho_solve((lower, True), b, check_finite=False)


def chol_logdet(lower: np.ndarray) -> float:
    """Log-determinant of ``A`` from its lower Cholesky factor."""
    if lower.size == 0:
        return 0.0
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def chol_inverse(lower: np.ndarray) -> np.ndarray:
    """Explicit inverse of ``A`` from its lower Cholesky factor."""
    if lower.size == 0:
        return np.zeros_like(lower)
    return cho_solve((lower, True), np.eye(lower.shape[0]), check_finite=False)
