"""Covariance functions: the non-stationary product kernel and the latent SE kernel.

The observable surrogate uses a separable non-stationary kernel in which both
the signal strength and the lengthscale are input-dependent fields,

    k(x, x') = prod_i s_i(x_i) s_i(x'_i)
               * sqrt( l_i(x_i) l_i(x'_i) / (l_i(x_i)^2 + l_i(x'_i)^2) )
               * exp( -(x_i - x'_i)^2 / (l_i(x_i)^2 + l_i(x'_i)^2) ),

so that for constant fields k(x, x) = prod_i s_i^2 / sqrt(2).  Passing
``normalized=True`` multiplies each factor by sqrt(2), which restores the
conventional scaling k(x, x) = prod_i s_i^2; the default keeps the
unnormalized form above.

The log fields themselves are modelled with the stationary squared
exponential kernel ``latent_se_covariance``.
"""

from __future__ import annotations

import numpy as np


def _check_positive(name: str, value: np.ndarray):
    if np.any(np.asarray(value) <= 0.0):
        raise ValueError(f"{name} must be strictly positive")


def gibbs_factors(
    delta2: np.ndarray,
    u_row: np.ndarray,
    u_col: np.ndarray,
    normalized: bool = False,
) -> np.ndarray:
    """One dimension's lengthscale factor of the product kernel.

    Parameters
    ----------
    delta2 : ndarray
        Squared coordinate differences (x_i - x'_i)^2, any broadcastable shape.
    u_row, u_col : ndarray
        Squared lengthscales l_i^2 at the row and column points.

    Returns
    -------
    ndarray
        sqrt( l l' / (l^2 + l'^2) ) * exp( -delta2 / (l^2 + l'^2) ), times
        sqrt(2) when ``normalized``.
    """
    den = u_row + u_col
    out = np.sqrt(np.sqrt(u_row * u_col) / den) * np.exp(-delta2 / den)
    if normalized:
        out = out * np.sqrt(2.0)
    return out


def gibbs_cross(
    x1: np.ndarray,
    s1: np.ndarray,
    l1: np.ndarray,
    x2: np.ndarray,
    s2: np.ndarray,
    l2: np.ndarray,
    normalized: bool = False,
) -> np.ndarray:
    """Cross-covariance matrix of the non-stationary kernel.

    Parameters
    ----------
    x1, x2 : ndarray, shapes (n1, d) and (n2, d)
        Input locations.
    s1, l1, s2, l2 : ndarray, same shapes as ``x1`` / ``x2``
        Signal and lengthscale field values at the inputs (natural scale).

    Returns
    -------
    ndarray, shape (n1, n2)
    """
    x1, x2 = np.atleast_2d(x1), np.atleast_2d(x2)
    s1, l1 = np.atleast_2d(s1), np.atleast_2d(l1)
    s2, l2 = np.atleast_2d(s2), np.atleast_2d(l2)
    n1, d = x1.shape
    n2 = x2.shape[0]
    out = np.ones((n1, n2))
    for i in range(d):
        delta2 = (x1[:, i, None] - x2[None, :, i]) ** 2
        u_row = (l1[:, i] ** 2)[:, None]
        u_col = (l2[:, i] ** 2)[None, :]
        out *= s1[:, i, None] * s2[None, :, i]
        out *= gibbs_factors(delta2, u_row, u_col, normalized)
    return out


def gibbs_matrix(
    x: np.ndarray, s: np.ndarray, l: np.ndarray, normalized: bool = False
) -> np.ndarray:
    """Symmetric kernel matrix of the non-stationary kernel at one point set."""
    return gibbs_cross(x, s, l, x, s, l, normalized)


def gibbs_covariance(
    x: np.ndarray,
    x2: np.ndarray,
    s_at: np.ndarray,
    s2_at: np.ndarray,
    l_at: np.ndarray,
    l2_at: np.ndarray,
    normalized: bool = False,
) -> float:
    """Kernel value between two points given the field values at each.

    Parameters
    ----------
    x, x2 : ndarray, shape (d,)
        The two input points.
    s_at, s2_at : ndarray, shape (d,)
        Per-dimension signal field values at ``x`` and ``x2``.
    l_at, l2_at : ndarray, shape (d,)
        Per-dimension lengthscale field values at ``x`` and ``x2``; must be
        strictly positive.
    """
    _check_positive("signal field values", np.concatenate([np.ravel(s_at), np.ravel(s2_at)]))
    _check_positive("lengthscale field values", np.concatenate([np.ravel(l_at), np.ravel(l2_at)]))
    k = gibbs_cross(
        np.atleast_1d(x)[None, :],
        np.atleast_1d(s_at)[None, :],
        np.atleast_1d(l_at)[None, :],
        np.atleast_1d(x2)[None, :],
        np.atleast_1d(s2_at)[None, :],
        np.atleast_1d(l2_at)[None, :],
        normalized,
    )
    return float(k[0, 0])


def se_cross(t1: np.ndarray, t2: np.ndarray, amplitude: float, scale: float) -> np.ndarray:
    """Squared-exponential cross-covariance v^2 exp(-(t-t')^2 / (2 ell^2))."""
    t1 = np.asarray(t1, dtype=float).ravel()
    t2 = np.asarray(t2, dtype=float).ravel()
    delta2 = (t1[:, None] - t2[None, :]) ** 2
    return amplitude**2 * np.exp(-0.5 * delta2 / scale**2)


def se_matrix(t: np.ndarray, amplitude: float, scale: float) -> np.ndarray:
    """Squared-exponential kernel matrix over scalar inputs ``t``."""
    return se_cross(t, t, amplitude, scale)


def latent_se_covariance(t: float, t2: float, hyper) -> float:
    """Covariance of a latent log field between scalar inputs ``t`` and ``t2``.

    ``hyper`` is the (mean, amplitude, scale) triple of the latent process;
    the mean does not enter the covariance but travels with the other two.
    """
    _, amplitude, scale = hyper
    if amplitude <= 0.0 or scale <= 0.0:
        raise ValueError("latent amplitude and scale must be strictly positive")
    return float(se_cross([t], [t2], amplitude, scale)[0, 0])
