"""Truncated Karhunen-Loève representation of the conditional posterior GP.

For one posterior sample of the surrogate, the conditional GP f | data is
expanded over a Latin-hypercube quadrature grid by the Nystrom method:

    f(x) ~ w(x) + sum_{i<=W} xi_i sqrt(eta_i) phi_i(x),   xi_i iid N(0,1),

where (eta_i, phi_i) approximate the spectrum of the conditional covariance
under the uniform measure on the design space.  Eigenvalues of the
quadrature matrix are divided by n_quad and eigenvectors scaled by
sqrt(n_quad), which makes the spectrum stable under quadrature refinement.

A hypothetical observation (x~, y~) updates the coefficient vector xi in
closed form: with a_i = sqrt(eta_i) phi_i(x~) the posterior of xi is normal
with covariance I - a a^T/(sigma^2 + a.a) (a rank-one downdate obtained by
Sherman-Morrison) and mean a (y~ - w(x~))/(sigma^2 + a.a).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import lhs
from .kernels import gibbs_cross
from .linalg import chol_solve
from .nsgp import Dataset, PosteriorSample, latent_fields_at, predictive_mean_cov

DEFAULT_QUAD_1D = 500
DEFAULT_QUAD_ND = 1000
EIGENVALUE_FLOOR = 1e-12  # relative to the largest eigenvalue


class DegeneratePosteriorError(RuntimeError):
    """The conditional posterior has no usable eigenvalues (fully collapsed)."""


def truncation_count(eigenvalues: np.ndarray, beta: float) -> int:
    """Smallest W whose leading eigenvalues carry an energy fraction >= beta."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    ratios = np.cumsum(eigenvalues) / np.sum(eigenvalues)
    return int(np.searchsorted(ratios, beta - 1e-15) + 1)


def spectral_truncate(cov: np.ndarray, beta: float):
    """Descending eigenpairs of ``cov`` above the floor, truncated at beta.

    Raises
    ------
    DegeneratePosteriorError
        When no eigenvalue clears the relative floor (collapsed posterior).
    """
    lam, vecs = np.linalg.eigh(cov)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    keep = lam > max(EIGENVALUE_FLOOR * lam[0], 0.0)
    if not np.any(keep):
        raise DegeneratePosteriorError(
            "conditional posterior carries no spectral energy above the floor"
        )
    lam, vecs = lam[keep], vecs[:, keep]
    w = truncation_count(lam, beta)
    return lam[:w], vecs[:, :w]


@dataclass(frozen=True)
class KleExpansion:
    """Truncated expansion of one posterior sample's conditional GP.

    ``eigenvalues`` are the operator eigenvalues eta (descending), and
    ``eigenvectors`` the orthonormal columns of the quadrature matrix; the
    Nystrom extension turns them into eigenfunction values anywhere.
    """

    sample: PosteriorSample
    quad_points: np.ndarray      # (n_quad, dim)
    eigenvalues: np.ndarray      # (W,) eta, descending
    raw_eigenvalues: np.ndarray  # (W,) quadrature-matrix eigenvalues
    eigenvectors: np.ndarray     # (n_quad, W) orthonormal columns
    beta: float
    _quad_s: np.ndarray          # latent signal field at quadrature points
    _quad_l: np.ndarray          # latent lengthscale field at quadrature points
    _cross_weights: np.ndarray   # (n, n_quad): (K + noise I)^{-1} K_{n,quad}

    @property
    def n_terms(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def n_quad(self) -> int:
        return self.quad_points.shape[0]

    def _conditional_cross(self, points: np.ndarray) -> np.ndarray:
        """Conditional covariance between arbitrary points and the quadrature."""
        data = self.sample.data
        s_t, l_t = latent_fields_at(points, self.sample)
        k_tq = gibbs_cross(points, s_t, l_t, self.quad_points, self._quad_s,
                           self._quad_l, self.sample.gibbs_normalized)
        if data.n == 0:
            return k_tq, np.zeros(points.shape[0])
        s_n = np.exp(self.sample.fields.log_signal)
        l_n = np.exp(self.sample.fields.log_length)
        k_tn = gibbs_cross(points, s_t, l_t, data.designs, s_n, l_n,
                           self.sample.gibbs_normalized)
        return k_tq - k_tn @ self._cross_weights, k_tn @ self.sample.alpha

    def basis_at(self, points: np.ndarray):
        """Mean and scaled eigenfunction matrix at ``points``.

        Returns
        -------
        (mean, basis)
            ``mean`` has shape (n_points,), ``basis`` shape (n_points, W)
            with entries sqrt(eta_i) phi_i(x); a path is then
            mean + basis @ xi.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cross, mean = self._conditional_cross(points)
        phi = cross @ self.eigenvectors
        phi *= np.sqrt(self.n_quad) / self.raw_eigenvalues
        return mean, phi * np.sqrt(self.eigenvalues)

    def eigenfunctions_at(self, points: np.ndarray) -> np.ndarray:
        """phi_i(x) for each retained i, shape (n_points, W)."""
        _, basis = self.basis_at(points)
        return basis / np.sqrt(self.eigenvalues)

    def mean_at(self, points: np.ndarray) -> np.ndarray:
        mean, _ = self.basis_at(points)
        return mean


def build(
    sample: PosteriorSample,
    data: Dataset | None = None,
    n_quad: int | None = None,
    beta: float = 0.95,
    quad_points: np.ndarray | None = None,
    seed: int = 0,
) -> KleExpansion:
    """Expand one posterior sample's conditional GP over an LHS quadrature.

    Parameters
    ----------
    sample : PosteriorSample
    data : Dataset, optional
        Defaults to the dataset the sample was built from.
    n_quad : int, optional
        Quadrature size; defaults to 500 in one dimension, 1000 otherwise.
        Ignored when explicit ``quad_points`` are supplied.
    beta : float
        Energy fraction retained by the truncation.
    quad_points : ndarray, optional
        Fixed quadrature grid shared across posterior samples of one
        campaign iteration.
    seed : int
        Seed for the LHS grid when ``quad_points`` is not given.

    Raises
    ------
    DegeneratePosteriorError
        When every eigenvalue falls below the relative floor.
    """
    data = data if data is not None else sample.data
    space = data.space
    if quad_points is None:
        if n_quad is None:
            n_quad = DEFAULT_QUAD_1D if space.dim == 1 else DEFAULT_QUAD_ND
        if n_quad < 2:
            raise ValueError("n_quad must be at least 2")
        quad_points = lhs(n_quad, space, seed)
    else:
        quad_points = np.atleast_2d(np.asarray(quad_points, dtype=float))
    m = quad_points.shape[0]

    _, cov = predictive_mean_cov(quad_points, sample, full_cov=True)
    lam, vecs = spectral_truncate(cov, beta)

    quad_s, quad_l = latent_fields_at(quad_points, sample)
    if data.n:
        s_n = np.exp(sample.fields.log_signal)
        l_n = np.exp(sample.fields.log_length)
        k_nq = gibbs_cross(data.designs, s_n, l_n, quad_points, quad_s, quad_l,
                           sample.gibbs_normalized)
        cross_weights = chol_solve(sample.chol_obs, k_nq)
    else:
        cross_weights = np.zeros((0, m))

    return KleExpansion(
        sample=sample,
        quad_points=quad_points,
        eigenvalues=lam / m,
        raw_eigenvalues=lam,
        eigenvectors=vecs,
        beta=beta,
        _quad_s=quad_s,
        _quad_l=quad_l,
        _cross_weights=cross_weights,
    )


def sample_path(exp: KleExpansion, xi: np.ndarray):
    """Analytic surrogate path for one coefficient vector.

    Returns a callable mapping a point (dim,) to a float, or a batch
    (n, dim) to an (n,) vector.  With xi = 0 the path is the predictive
    mean everywhere.
    """
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape[0] != exp.n_terms:
        raise ValueError(f"xi must have length {exp.n_terms}, got {xi.shape[0]}")

    def path(points):
        points = np.asarray(points, dtype=float)
        scalar = points.ndim == 1
        mean, basis = exp.basis_at(np.atleast_2d(points))
        values = mean + basis @ xi
        return float(values[0]) if scalar else values

    return path


@dataclass(frozen=True)
class HypotheticalPosterior:
    """Gaussian law of the KLE coefficients given one hypothetical observation."""

    mean: np.ndarray        # (W,)
    covariance: np.ndarray  # (W, W)
    feature: np.ndarray     # (W,) entries sqrt(eta_i) phi_i(x~)
    noise_variance: float

    def cov_factor(self) -> np.ndarray:
        """Exact symmetric square root of the rank-one-downdate covariance."""
        a = self.feature
        q = float(a @ a)
        w = a.shape[0]
        if q == 0.0:
            return np.eye(w)
        s2 = self.noise_variance + q
        gamma = (1.0 - np.sqrt(self.noise_variance / s2)) / q
        return np.eye(w) - gamma * np.outer(a, a)

    def draw(self, z: np.ndarray) -> np.ndarray:
        """Map standard-normal draws (W,) or (W, k) through the posterior."""
        z = np.asarray(z, dtype=float)
        out = self.cov_factor() @ z
        return out + (self.mean if z.ndim == 1 else self.mean[:, None])


def condition_on_hypothetical(
    exp: KleExpansion, x_new: np.ndarray, y_new: float, noise_variance: float
) -> HypotheticalPosterior:
    """Closed-form coefficient update for a hypothetical observation.

    With a the scaled eigenfunction vector at ``x_new`` and q = a.a, the
    coefficient posterior is N(mu, Sigma) with

        Sigma = I - a a^T / (noise_variance + q),
        mu    = a (y_new - w(x_new)) / (noise_variance + q),

    the stable equivalent of Sigma a^T (y~ - w)/sigma^2.
    """
    if noise_variance <= 0.0:
        raise ValueError("noise_variance must be strictly positive")
    mean, basis = exp.basis_at(np.atleast_2d(np.asarray(x_new, dtype=float)))
    a = basis[0]
    mu, cov = coefficient_update(a, float(y_new) - float(mean[0]), noise_variance)
    return HypotheticalPosterior(mean=mu, covariance=cov, feature=a,
                                 noise_variance=noise_variance)


def coefficient_update(a: np.ndarray, residual: float, noise_variance: float):
    """Rank-one coefficient posterior (mean, covariance) for feature ``a``."""
    a = np.asarray(a, dtype=float).ravel()
    s2 = noise_variance + float(a @ a)
    cov = np.eye(a.shape[0]) - np.outer(a, a) / s2
    mu = a * (residual / s2)
    return mu, cov
