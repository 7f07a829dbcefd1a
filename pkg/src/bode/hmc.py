"""Hamiltonian Monte Carlo with dual-averaging step-size adaptation.

Generic over the target: ``sample`` takes any callable returning the log
density and its gradient.  During burn-in the step size is tuned by dual
averaging toward a target acceptance rate, and a diagonal mass matrix is
estimated from the second half of burn-in (the step size is re-tuned after
the mass switch and both are frozen at the end of burn-in).  Divergent
trajectories (non-finite Hamiltonian) are rejected; persistent divergence
during burn-in aborts the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# dual-averaging constants (standard choices)
DA_GAMMA = 0.05
DA_T0 = 10.0
DA_KAPPA = 0.75


class SamplerDivergenceError(RuntimeError):
    """More than half of the burn-in trajectories diverged."""


@dataclass(frozen=True)
class HmcConfig:
    """Sampler settings.

    The stock preset (11500 draws, 1500 burn-in, 50 retained) matches the
    full-budget configuration; tests use the desk-scale preset.
    """

    n_samples: int = 11500
    burn_in: int = 1500
    leapfrog_steps: int = 10
    step_size: float = 0.1
    adapt_during_burnin: bool = True
    target_accept: float = 0.75
    thin_to: int = 50          # M: posterior draws kept downstream
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1 or self.leapfrog_steps < 1:
            raise ValueError("n_samples and leapfrog_steps must be positive")
        if self.burn_in < 0 or self.burn_in >= self.n_samples:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_samples")
        if self.step_size <= 0.0:
            raise ValueError("step_size must be positive")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")
        if not 1 <= self.thin_to <= self.n_samples - self.burn_in:
            raise ValueError("thin_to must lie in [1, n_samples - burn_in]")

    @classmethod
    def desk_scale(cls, **overrides) -> "HmcConfig":
        """Reduced preset for interactive use and CI."""
        defaults = dict(n_samples=1500, burn_in=500, thin_to=20)
        defaults.update(overrides)
        return cls(**defaults)


@dataclass(frozen=True)
class Chain:
    """All draws of one HMC run plus bookkeeping needed to thin it."""

    draws: np.ndarray          # (n_samples, dim), burn-in included
    log_densities: np.ndarray  # (n_samples,)
    accept_rate: float         # post-burn-in acceptance fraction
    burn_in: int
    step_size: float           # frozen step size used after burn-in
    inv_mass: np.ndarray       # diagonal of the inverse mass matrix
    n_divergent: int

    def __post_init__(self):
        if not 0.0 <= self.accept_rate <= 1.0:
            raise ValueError("accept_rate must lie in [0, 1]")


class _DualAveraging:
    """Nesterov dual averaging of log step size toward a target acceptance."""

    def __init__(self, step_size: float, target: float):
        self.mu = np.log(10.0 * step_size)
        self.target = target
        self.log_eps = np.log(step_size)
        self.log_eps_bar = np.log(step_size)
        self.h_bar = 0.0
        self.m = 0

    def update(self, accept_prob: float) -> float:
        self.m += 1
        frac = 1.0 / (self.m + DA_T0)
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - accept_prob)
        self.log_eps = self.mu - np.sqrt(self.m) / DA_GAMMA * self.h_bar
        eta = self.m ** (-DA_KAPPA)
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar
        return float(np.exp(self.log_eps))

    @property
    def averaged(self) -> float:
        return float(np.exp(self.log_eps_bar))


def _leapfrog(logp_grad, theta, r, eps, inv_mass, n_steps):
    """Integrate Hamilton's equations; returns (theta, r, logp, grad)."""
    value, grad = logp_grad(theta)
    r = r + 0.5 * eps * grad
    for step in range(n_steps):
        theta = theta + eps * inv_mass * r
        value, grad = logp_grad(theta)
        if not np.isfinite(value):
            return theta, r, -np.inf, grad
        r = r + (eps if step < n_steps - 1 else 0.5 * eps) * grad
    return theta, r, value, grad


def sample(log_density_and_grad, init: np.ndarray, cfg: HmcConfig) -> Chain:
    """Run one HMC chain.

    Parameters
    ----------
    log_density_and_grad : callable
        Maps a parameter vector to (log density, gradient).  A -inf value
        marks an out-of-support point (treated as divergence).
    init : ndarray
        Starting point; the log density must be finite here.
    cfg : HmcConfig

    Returns
    -------
    Chain
        ``cfg.n_samples`` draws including burn-in, in order.
    """
    theta = np.asarray(init, dtype=float).copy()
    value, _ = log_density_and_grad(theta)
    if not np.isfinite(value):
        raise ValueError("log density must be finite at the initial position")

    rng = np.random.default_rng(cfg.seed)
    dim = theta.shape[0]
    inv_mass = np.ones(dim)
    eps = cfg.step_size
    adapting = cfg.adapt_during_burnin and cfg.burn_in > 0
    averager = _DualAveraging(eps, cfg.target_accept) if adapting else None

    # mass-matrix schedule inside burn-in: estimate from [half, three_q),
    # then re-tune the step size on the remaining quarter
    half = cfg.burn_in // 2
    three_q = (3 * cfg.burn_in) // 4
    estimate_mass = adapting and cfg.burn_in >= 40

    draws = np.empty((cfg.n_samples, dim))
    log_densities = np.empty(cfg.n_samples)
    n_divergent = 0
    divergent_burnin = 0
    accepted_main = 0

    for it in range(cfg.n_samples):
        in_burnin = it < cfg.burn_in
        if estimate_mass and it == three_q:
            window = draws[half:three_q]
            inv_mass = np.clip(np.var(window, axis=0), 1e-10, 1e10)
            eps = max(averager.averaged, 1e-10)
            averager = _DualAveraging(eps, cfg.target_accept)

        r0 = rng.standard_normal(dim) / np.sqrt(inv_mass)
        h0 = value - 0.5 * np.sum(inv_mass * r0**2)
        with np.errstate(over="ignore", invalid="ignore"):
            theta_new, r_new, value_new, _ = _leapfrog(
                log_density_and_grad, theta, r0, eps, inv_mass,
                cfg.leapfrog_steps,
            )
            if np.isfinite(value_new):
                h1 = value_new - 0.5 * np.sum(inv_mass * r_new**2)
                log_ratio = h1 - h0
                divergent = not np.isfinite(log_ratio)
            else:
                divergent = True

        if divergent:
            accept_prob = 0.0
            accepted = False
            n_divergent += 1
            if in_burnin:
                divergent_burnin += 1
                if not adapting:
                    eps *= 0.9  # no averager to shrink for us
        else:
            accept_prob = float(min(1.0, np.exp(min(log_ratio, 0.0))))
            accepted = np.log(rng.random()) < log_ratio
        if accepted:
            theta, value = theta_new, value_new

        draws[it] = theta
        log_densities[it] = value
        if not in_burnin and accepted:
            accepted_main += 1

        if adapting and in_burnin:
            eps = averager.update(accept_prob)
            if it == cfg.burn_in - 1:
                eps = averager.averaged  # freeze

        if in_burnin and cfg.burn_in > 0 and divergent_burnin > 0.5 * cfg.burn_in:
            raise SamplerDivergenceError(
                f"{divergent_burnin} divergences in {it + 1} burn-in iterations"
            )

    n_main = cfg.n_samples - cfg.burn_in
    return Chain(
        draws=draws,
        log_densities=log_densities,
        accept_rate=accepted_main / n_main if n_main else 0.0,
        burn_in=cfg.burn_in,
        step_size=float(eps),
        inv_mass=inv_mass,
        n_divergent=n_divergent,
    )


def thin(chain: Chain, m: int) -> np.ndarray:
    """m evenly spaced post-burn-in draws, final draw always included.

    Uses indices floor((i+1) n / m) - 1 for i = 0..m-1 into the post-burn-in
    segment of length n.
    """
    post = chain.draws[chain.burn_in :]
    n = post.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    idx = [((i + 1) * n) // m - 1 for i in range(m)]
    return post[idx]
