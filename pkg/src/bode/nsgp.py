"""Fully Bayesian non-stationary Gaussian-process surrogate.

The observable f is modelled as a zero-mean GP whose kernel is the
non-stationary product kernel from :mod:`bode.kernels`.  The log signal and
log lengthscale fields of that kernel are themselves GPs over the design
space (squared-exponential kernel per input dimension), observed without
noise at the experiment designs.  Field values at the designs are treated as
unknowns and marginalized by sampling, never optimized; the likelihood is
collapsed by integrating the observable GP analytically, so the posterior
density below involves only the field values at the designs plus the latent
hyperparameters.

Hyperpriors: the amplitude and scale of every latent GP carry Gamma(shape,
rate) priors (standard exponential by default).  The mean of each log
lengthscale field is a fixed constant.  The mean of the log signal field is
either fixed or, for one-dimensional problems, given a normal prior and
sampled along with everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .design import DesignSpace
from .kernels import gibbs_cross, gibbs_matrix, se_cross
from .linalg import (
    PositiveDefiniteError,
    chol_inverse,
    chol_logdet,
    chol_solve,
    jitter_cholesky,
)

LOG_2PI = float(np.log(2.0 * np.pi))

DEFAULT_NOISE_VARIANCE = 1e-6  # fixed observation noise on the collapsed GP


@dataclass(frozen=True)
class Dataset:
    """Evaluated designs and their observations.

    Parameters
    ----------
    space : DesignSpace
        Box the designs live in.
    designs : ndarray, shape (n, dim)
        Evaluated input points; every row must lie inside ``space``.
    observations : ndarray, shape (n,)
        Scalar responses, finite.
    noise_variance : float
        Fixed observation-noise variance added to the kernel diagonal.
    """

    space: DesignSpace
    designs: np.ndarray
    observations: np.ndarray
    noise_variance: float = DEFAULT_NOISE_VARIANCE

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.designs, dtype=float))
        if x.size == 0:
            x = x.reshape(0, self.space.dim)
        y = np.asarray(self.observations, dtype=float).ravel()
        if x.shape[1] != self.space.dim:
            raise ValueError(
                f"designs have dimension {x.shape[1]}, space has {self.space.dim}"
            )
        if x.shape[0] != y.shape[0]:
            raise ValueError(
                f"{x.shape[0]} designs but {y.shape[0]} observations"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("designs and observations must be finite")
        if x.shape[0] and not self.space.contains(x):
            raise ValueError("all designs must lie inside the design space")
        if self.noise_variance <= 0.0:
            raise ValueError("noise_variance must be strictly positive")
        object.__setattr__(self, "designs", x)
        object.__setattr__(self, "observations", y)

    @property
    def n(self) -> int:
        return self.designs.shape[0]

    def append(self, x: np.ndarray, y: float) -> "Dataset":
        """New dataset with one more (design, observation) pair."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return replace(
            self,
            designs=np.vstack([self.designs, x]),
            observations=np.append(self.observations, float(y)),
        )

    def standardized(self) -> tuple["Dataset", float, float]:
        """Dataset with observations shifted/scaled to zero mean, unit sd.

        Returns the transformed dataset together with the (shift, scale)
        actually applied; scale falls back to 1 for near-constant data.
        """
        shift = float(np.mean(self.observations)) if self.n else 0.0
        scale = float(np.std(self.observations)) if self.n else 1.0
        if not np.isfinite(scale) or scale < 1e-12:
            scale = 1.0
        out = replace(self, observations=(self.observations - shift) / scale)
        return out, shift, scale


@dataclass(frozen=True)
class HyperpriorConfig:
    """Fixed constants and prior settings of the latent field model.

    ``signal_mean`` fixes the mean of every log signal field; ``None`` means
    the mean is a free parameter with a N(0, signal_mean_variance) prior.
    ``gibbs_normalized`` switches the product kernel to the conventional
    scaling with k(x, x) = prod_i s_i^2 (see :mod:`bode.kernels`).
    """

    lengthscale_mean: float = -2.0   # mean of every log lengthscale field
    signal_mean: float | None = None  # None => sampled (1-D convention)
    signal_mean_variance: float = 4.0
    gamma_shape: float = 1.0
    gamma_rate: float = 1.0
    gibbs_normalized: bool = False

    def __post_init__(self):
        if self.gamma_shape <= 0.0 or self.gamma_rate <= 0.0:
            raise ValueError("gamma_shape and gamma_rate must be strictly positive")
        if self.signal_mean_variance <= 0.0:
            raise ValueError("signal_mean_variance must be strictly positive")

    @classmethod
    def for_dim(cls, dim: int, gibbs_normalized: bool = False) -> "HyperpriorConfig":
        """Per-dimension conventions: see module docstring."""
        if dim == 1:
            return cls(lengthscale_mean=-2.0, signal_mean=None,
                       gibbs_normalized=gibbs_normalized)
        return cls(lengthscale_mean=0.0, signal_mean=0.0,
                   gibbs_normalized=gibbs_normalized)

    @property
    def signal_mean_sampled(self) -> bool:
        return self.signal_mean is None


@dataclass(frozen=True)
class LatentHyperparams:
    """Per-dimension (mean, amplitude, scale) of each latent log field.

    All arrays have shape (dim,).  Amplitudes and scales are on the natural
    (positive) scale.
    """

    s_mean: np.ndarray
    s_amp: np.ndarray
    s_scale: np.ndarray
    l_mean: np.ndarray
    l_amp: np.ndarray
    l_scale: np.ndarray

    def __post_init__(self):
        for name in ("s_mean", "s_amp", "s_scale", "l_mean", "l_amp", "l_scale"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, v)
        d = self.s_mean.shape[0]
        for name in ("s_amp", "s_scale", "l_mean", "l_amp", "l_scale"):
            if getattr(self, name).shape[0] != d:
                raise ValueError("all hyperparameter arrays must share one length")
        for name in ("s_amp", "s_scale", "l_amp", "l_scale"):
            if np.any(getattr(self, name) <= 0.0):
                raise ValueError(f"{name} must be strictly positive")

    @property
    def dim(self) -> int:
        return self.s_mean.shape[0]

    def triple(self, which: str, dim: int) -> tuple[float, float, float]:
        """(mean, amplitude, scale) of field ``which`` in dimension ``dim``."""
        if which == "signal":
            return (float(self.s_mean[dim]), float(self.s_amp[dim]),
                    float(self.s_scale[dim]))
        if which == "lengthscale":
            return (float(self.l_mean[dim]), float(self.l_amp[dim]),
                    float(self.l_scale[dim]))
        raise ValueError(f"which must be 'signal' or 'lengthscale', got {which!r}")


@dataclass(frozen=True)
class LatentFieldValues:
    """Log field values at the designs; both arrays have shape (n, dim)."""

    log_signal: np.ndarray
    log_length: np.ndarray

    def __post_init__(self):
        zs = np.atleast_2d(np.asarray(self.log_signal, dtype=float))
        zl = np.atleast_2d(np.asarray(self.log_length, dtype=float))
        if zs.shape != zl.shape:
            raise ValueError("log_signal and log_length must share one shape")
        object.__setattr__(self, "log_signal", zs)
        object.__setattr__(self, "log_length", zl)


# Relative diagonal nugget on every latent kernel matrix.  The latent fields
# are conditioned without observation noise, so a small nugget keeps the
# factorization stable; being proportional to the squared amplitude it leaves
# the amplitude gradient of the collapsed density exact.
LATENT_NUGGET = 1e-8


def _latent_chol(t: np.ndarray, amp: float, scale: float):
    """Jittered Cholesky factor of one latent kernel matrix."""
    k = se_cross(t, t, amp, scale)
    k[np.diag_indices_from(k)] += LATENT_NUGGET * amp**2
    return jitter_cholesky(k)


@dataclass(frozen=True)
class PosteriorSample:
    """One posterior draw of the surrogate with its cached factorizations.

    Holds everything conditional prediction needs: the Cholesky factor of
    K + noise * I at the designs, the weights alpha = (K + noise I)^{-1} y,
    and per-field interpolation weights for evaluating the latent log fields
    away from the designs.
    """

    data: Dataset
    fields: LatentFieldValues
    hyper: LatentHyperparams
    gibbs_normalized: bool
    chol_obs: np.ndarray      # (n, n) lower factor of K + noise * I
    alpha: np.ndarray         # (n,)
    w_signal: np.ndarray      # (n, dim) latent weights per dimension
    w_length: np.ndarray      # (n, dim)
    log_density: float = np.nan

    @classmethod
    def build(
        cls,
        data: Dataset,
        fields: LatentFieldValues,
        hyper: LatentHyperparams,
        gibbs_normalized: bool = False,
        log_density: float = np.nan,
    ) -> "PosteriorSample":
        n, d = data.designs.shape
        if fields.log_signal.shape != (n, d) and n > 0:
            raise ValueError(
                f"field values have shape {fields.log_signal.shape}, expected {(n, d)}"
            )
        if n == 0:
            empty = np.zeros((0, d))
            return cls(data, fields, hyper, gibbs_normalized,
                       np.zeros((0, 0)), np.zeros(0), empty, empty, log_density)
        s = np.exp(fields.log_signal)
        l = np.exp(fields.log_length)
        k = gibbs_matrix(data.designs, s, l, gibbs_normalized)
        c = k + data.noise_variance * np.eye(n)
        lower, _ = jitter_cholesky(c)
        alpha = chol_solve(lower, data.observations)
        w_signal = np.empty((n, d))
        w_length = np.empty((n, d))
        for i in range(d):
            t = data.designs[:, i]
            for which, z, out in (
                ("signal", fields.log_signal[:, i], w_signal),
                ("lengthscale", fields.log_length[:, i], w_length),
            ):
                m, amp, scale = hyper.triple(which, i)
                lo, _ = _latent_chol(t, amp, scale)
                out[:, i] = chol_solve(lo, z - m)
        return cls(data, fields, hyper, gibbs_normalized,
                   lower, alpha, w_signal, w_length, log_density)


def latent_fields_at(points: np.ndarray, sample: PosteriorSample):
    """Signal and lengthscale fields at new points, natural scale.

    Uses the noise-free conditional mean of each latent log GP given its
    sampled values at the designs, then exponentiates.

    Returns
    -------
    (ndarray, ndarray), each of shape (n_points, dim)
        Signal values and lengthscale values.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n_t, d = points.shape
    x = sample.data.designs
    log_s = np.empty((n_t, d))
    log_l = np.empty((n_t, d))
    for i in range(d):
        for which, w, out in (
            ("signal", sample.w_signal, log_s),
            ("lengthscale", sample.w_length, log_l),
        ):
            m, amp, scale = sample.hyper.triple(which, i)
            if x.shape[0] == 0:
                out[:, i] = m
            else:
                cross = se_cross(points[:, i], x[:, i], amp, scale)
                out[:, i] = m + cross @ w[:, i]
    return np.exp(log_s), np.exp(log_l)


def latent_field_at(x_new: np.ndarray, sample: PosteriorSample,
                    which: str, dim: int) -> float:
    """One latent field value at one point (natural scale)."""
    if not 0 <= dim < sample.hyper.dim:
        raise ValueError(f"dim must be in [0, {sample.hyper.dim}), got {dim}")
    s, l = latent_fields_at(np.atleast_1d(x_new)[None, :], sample)
    return float(s[0, dim]) if which == "signal" else float(l[0, dim])


def _prior_diag(points_s: np.ndarray, normalized: bool) -> np.ndarray:
    """k(x, x) for each row given signal field values at the points."""
    d = points_s.shape[1]
    diag = np.prod(points_s**2, axis=1)
    if not normalized:
        diag = diag * 2.0 ** (-d / 2.0)
    return diag


def predictive_mean_cov(points: np.ndarray, sample: PosteriorSample,
                        full_cov: bool = True):
    """Conditional mean and covariance of f at ``points`` under one sample.

    Parameters
    ----------
    points : ndarray, shape (n_t, dim)
    full_cov : bool
        If True return the full (n_t, n_t) covariance, otherwise the
        marginal variances, clamped at zero.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    data = sample.data
    s_t, l_t = latent_fields_at(points, sample)
    if data.n == 0:
        mean = np.zeros(points.shape[0])
        if full_cov:
            return mean, gibbs_matrix(points, s_t, l_t, sample.gibbs_normalized)
        return mean, _prior_diag(s_t, sample.gibbs_normalized)
    s_n = np.exp(sample.fields.log_signal)
    l_n = np.exp(sample.fields.log_length)
    k_tn = gibbs_cross(points, s_t, l_t, data.designs, s_n, l_n,
                       sample.gibbs_normalized)
    mean = k_tn @ sample.alpha
    v = chol_solve(sample.chol_obs, k_tn.T)
    if full_cov:
        k_tt = gibbs_matrix(points, s_t, l_t, sample.gibbs_normalized)
        cov = k_tt - k_tn @ v
        cov = 0.5 * (cov + cov.T)
        return mean, cov
    var = _prior_diag(s_t, sample.gibbs_normalized) - np.sum(k_tn * v.T, axis=1)
    return mean, np.maximum(var, 0.0)


def conditional_predict(x_new: np.ndarray, sample: PosteriorSample,
                        data: Dataset | None = None):
    """Predictive mean and variance of f at one point under one sample.

    Returns
    -------
    (float, float)
        Conditional mean and variance; the variance is clamped at zero.
    """
    if data is not None and data is not sample.data:
        sample = PosteriorSample.build(data, sample.fields, sample.hyper,
                                       sample.gibbs_normalized)
    mean, var = predictive_mean_cov(np.atleast_1d(x_new)[None, :], sample,
                                    full_cov=False)
    return float(mean[0]), float(var[0])


class PosteriorTarget:
    """Collapsed posterior density over field values and hyperparameters.

    The parameter vector stacks, in order: the log lengthscale field values
    (dimension-major, n per dimension), the log signal field values (same
    layout), then per dimension the transformed hyperparameters
    (log amplitude, log scale) of the lengthscale field followed by the
    signal field, and finally the signal field mean when it is sampled.
    Amplitudes and scales are sampled on the log scale; the density below
    includes the Jacobian of that transform.

    ``log_density`` returns -inf whenever the kernel matrix cannot be
    factorized (the sampler treats that as a divergence).
    """

    def __init__(self, data: Dataset, prior: HyperpriorConfig):
        self.data = data
        self.prior = prior
        self.n, self.dim = data.designs.shape
        x = data.designs
        # squared coordinate differences, reused by every density evaluation
        self._delta2 = [
            (x[:, i, None] - x[None, :, i]) ** 2 for i in range(self.dim)
        ]
        self._eye = np.eye(self.n)

    # -- parameter layout -------------------------------------------------

    @property
    def n_params(self) -> int:
        per_dim = 4 + (1 if self.prior.signal_mean_sampled else 0)
        return 2 * self.n * self.dim + per_dim * self.dim

    def pack(self, fields: LatentFieldValues, hyper: LatentHyperparams) -> np.ndarray:
        n, d = self.n, self.dim
        blocks = [fields.log_length.ravel(order="F"),
                  fields.log_signal.ravel(order="F")]
        for i in range(d):
            block = [np.log(hyper.l_amp[i]), np.log(hyper.l_scale[i]),
                     np.log(hyper.s_amp[i]), np.log(hyper.s_scale[i])]
            if self.prior.signal_mean_sampled:
                block.append(hyper.s_mean[i])
            blocks.append(np.asarray(block))
        return np.concatenate(blocks)

    def unpack(self, theta: np.ndarray) -> tuple[LatentFieldValues, LatentHyperparams]:
        n, d = self.n, self.dim
        theta = np.asarray(theta, dtype=float)
        z_l = theta[: n * d].reshape(n, d, order="F")
        z_s = theta[n * d : 2 * n * d].reshape(n, d, order="F")
        per_dim = 4 + (1 if self.prior.signal_mean_sampled else 0)
        tail = theta[2 * n * d :].reshape(d, per_dim)
        s_mean = (tail[:, 4] if self.prior.signal_mean_sampled
                  else np.full(d, self.prior.signal_mean))
        hyper = LatentHyperparams(
            s_mean=s_mean,
            s_amp=np.exp(tail[:, 2]),
            s_scale=np.exp(tail[:, 3]),
            l_mean=np.full(d, self.prior.lengthscale_mean),
            l_amp=np.exp(tail[:, 0]),
            l_scale=np.exp(tail[:, 1]),
        )
        return LatentFieldValues(log_signal=z_s, log_length=z_l), hyper

    def initial_position(self, rng: np.random.Generator) -> np.ndarray:
        """Start near the prior means with a small seeded perturbation."""
        n, d = self.n, self.dim
        z_l = np.full((n, d), self.prior.lengthscale_mean)
        z_s = np.full((n, d), self.prior.signal_mean or 0.0)
        fields = LatentFieldValues(
            log_signal=z_s + 0.05 * rng.standard_normal((n, d)),
            log_length=z_l + 0.05 * rng.standard_normal((n, d)),
        )
        hyper = LatentHyperparams(
            s_mean=np.zeros(d) if self.prior.signal_mean_sampled
            else np.full(d, self.prior.signal_mean),
            s_amp=np.exp(0.05 * rng.standard_normal(d)),
            s_scale=np.exp(0.05 * rng.standard_normal(d)),
            l_mean=np.full(d, self.prior.lengthscale_mean),
            l_amp=np.exp(0.05 * rng.standard_normal(d)),
            l_scale=np.exp(0.05 * rng.standard_normal(d)),
        )
        return self.pack(fields, hyper)

    # -- density and gradient ---------------------------------------------

    def log_density(self, theta: np.ndarray) -> float:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._eval(theta, with_grad=False)[0]

    def log_density_and_grad(self, theta: np.ndarray):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._eval(theta, with_grad=True)

    def _eval(self, theta, with_grad):
        n, d = self.n, self.dim
        theta = np.asarray(theta, dtype=float)
        z_l = theta[: n * d].reshape(n, d, order="F")
        z_s = theta[n * d : 2 * n * d].reshape(n, d, order="F")
        per_dim = 4 + (1 if self.prior.signal_mean_sampled else 0)
        tail = theta[2 * n * d :].reshape(d, per_dim)

        grad = np.zeros_like(theta) if with_grad else None
        g_zl = grad[: n * d].reshape(n, d, order="F") if with_grad else None
        g_zs = grad[n * d : 2 * n * d].reshape(n, d, order="F") if with_grad else None
        g_tail = grad[2 * n * d :].reshape(d, per_dim) if with_grad else None

        neg_inf = (-np.inf, np.zeros_like(theta)) if with_grad else (-np.inf, None)

        with np.errstate(over="ignore", invalid="ignore"):
            s_val = np.exp(z_s)
            u_val = np.exp(2.0 * z_l)  # squared lengthscales
            if not (np.all(np.isfinite(s_val)) and np.all(np.isfinite(u_val))):
                return neg_inf

            # collapsed likelihood of the observations
            k = np.ones((n, n))
            dims = []
            for i in range(d):
                u = u_val[:, i]
                den = u[:, None] + u[None, :]
                factor = np.sqrt(np.sqrt(np.outer(u, u)) / den)
                factor *= np.exp(-self._delta2[i] / den)
                if self.prior.gibbs_normalized:
                    factor *= np.sqrt(2.0)
                k *= np.outer(s_val[:, i], s_val[:, i]) * factor
                if with_grad:
                    dims.append((u, den))
            if not np.all(np.isfinite(k)):
                return neg_inf

        y = self.data.observations
        c = k + self.data.noise_variance * self._eye
        try:
            lower, _ = jitter_cholesky(c)
        except (PositiveDefiniteError, ValueError):
            return neg_inf
        alpha = chol_solve(lower, y)
        total = -0.5 * y @ alpha - 0.5 * chol_logdet(lower) - 0.5 * n * LOG_2PI

        if with_grad:
            big_g = 0.5 * (np.outer(alpha, alpha) - chol_inverse(lower))
            gk = big_g * k
            gs_common = 2.0 * gk.sum(axis=1)
            for i, (u, den) in enumerate(dims):
                ci = 0.5 - u[:, None] / den + 2.0 * u[:, None] * self._delta2[i] / den**2
                g_zl[:, i] += 2.0 * (gk * ci).sum(axis=1)
                g_zs[:, i] += gs_common

        # latent field priors and hyperpriors, dimension by dimension
        a_shape, b_rate = self.prior.gamma_shape, self.prior.gamma_rate
        gamma_const = a_shape * np.log(b_rate) - gammaln(a_shape)
        for i in range(d):
            t = self.data.designs[:, i]
            lat_delta2 = self._delta2[i]
            for which, z_col, g_col, amp_idx in (
                ("lengthscale", z_l[:, i], g_zl, 0),
                ("signal", z_s[:, i], g_zs, 2),
            ):
                log_amp = tail[i, amp_idx]
                log_scale = tail[i, amp_idx + 1]
                amp, scale = np.exp(log_amp), np.exp(log_scale)
                if not (np.isfinite(amp) and np.isfinite(scale)):
                    return neg_inf
                if which == "signal":
                    mean = (tail[i, 4] if self.prior.signal_mean_sampled
                            else self.prior.signal_mean)
                else:
                    mean = self.prior.lengthscale_mean
                k_lat = amp**2 * np.exp(-0.5 * lat_delta2 / scale**2)
                k_lat[np.diag_indices_from(k_lat)] += LATENT_NUGGET * amp**2
                try:
                    lo, _ = jitter_cholesky(k_lat)
                except (PositiveDefiniteError, ValueError):
                    return neg_inf
                r = z_col - mean
                w = chol_solve(lo, r)
                total += -0.5 * r @ w - 0.5 * chol_logdet(lo) - 0.5 * n * LOG_2PI
                # Gamma hyperpriors on amplitude and scale, sampled on the
                # log scale (Jacobian folded in)
                total += gamma_const + a_shape * log_amp - b_rate * amp
                total += gamma_const + a_shape * log_scale - b_rate * scale

                if with_grad:
                    g_col[:, i] += -w
                    k_inv = chol_inverse(lo)
                    m_scale = (k_lat - LATENT_NUGGET * amp**2 * self._eye) * (
                        lat_delta2 / scale**2
                    )
                    g_tail[i, amp_idx] += (w @ r - n) + (a_shape - b_rate * amp)
                    g_tail[i, amp_idx + 1] += (
                        0.5 * (w @ (m_scale @ w) - np.sum(k_inv * m_scale))
                        + (a_shape - b_rate * scale)
                    )
                    if which == "signal" and self.prior.signal_mean_sampled:
                        g_tail[i, 4] += np.sum(w)

            if self.prior.signal_mean_sampled:
                var_m = self.prior.signal_mean_variance
                m = tail[i, 4]
                total += -0.5 * m**2 / var_m - 0.5 * np.log(2.0 * np.pi * var_m)
                if with_grad:
                    g_tail[i, 4] += -m / var_m

        if not np.isfinite(total):
            return neg_inf
        return (float(total), grad) if with_grad else (float(total), None)

    def sample_from(self, theta: np.ndarray, log_density: float = np.nan) -> PosteriorSample:
        """Materialize a parameter vector as a prediction-ready sample."""
        fields, hyper = self.unpack(theta)
        return PosteriorSample.build(self.data, fields, hyper,
                                     self.prior.gibbs_normalized, log_density)


def log_unnormalized_posterior(
    data: Dataset,
    fields: LatentFieldValues,
    hyper: LatentHyperparams,
    prior: HyperpriorConfig,
) -> float:
    """Collapsed log posterior density on the natural hyperparameter scale.

    Sum of the collapsed Gaussian likelihood of the observations, the latent
    GP log densities of the field values, and the log hyperpriors on the
    (mean, amplitude, scale) of each latent field.  Unlike the density used
    for sampling, no change-of-variables Jacobian is included here.
    """
    target = PosteriorTarget(data, prior)
    theta = target.pack(fields, hyper)
    value = target.log_density(theta)
    if not np.isfinite(value):
        return value
    # remove the log-scale Jacobian (one log v + one log ell per field)
    jacobian = float(
        np.sum(np.log(hyper.l_amp)) + np.sum(np.log(hyper.l_scale))
        + np.sum(np.log(hyper.s_amp)) + np.sum(np.log(hyper.s_scale))
    )
    return value - jacobian
