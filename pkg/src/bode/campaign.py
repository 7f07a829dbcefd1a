"""The outer sequential-design loop.

One campaign iteration: (1) optionally standardize the outputs, (2) fit
the fully Bayesian nonstationary surrogate by HMC, (3) expand each
posterior sample as a truncated Karhunen-Loeve representation, (4) pick
the next experiment by maximizing the configured acquisition with the
inner Bayesian optimizer, (5) query the oracle and append the result.
The QoI moment summary recorded at each iteration reflects the posterior
*before* the new observation, so the trace shows what was known when the
design was chosen.

Every random stream is derived from the campaign seed plus the current
dataset size, never from loop counters, so a campaign resumed from disk
reproduces the uninterrupted run bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import EkldConfig, EkldSweep, ei_score, us_score
from .bgo import BgoConfig, maximize
from .design import DesignSpace, lhs
from .hmc import HmcConfig, sample as hmc_sample, thin
from .kle import DegeneratePosteriorError, KleExpansion, build as kle_build
from .nsgp import Dataset, HyperpriorConfig, PosteriorTarget
from .qoi import QoiSpec, draw_inner_points, qoi_draws
from .seeds import int_for, rng_for

ACQUISITIONS = ("ekld", "us", "ei")


class OracleError(RuntimeError):
    """The oracle failed; carries everything recorded before the failure."""

    def __init__(self, message, records=(), dataset=None):
        super().__init__(message)
        self.records = tuple(records)
        self.dataset = dataset


@dataclass(frozen=True)
class CampaignConfig:
    """Everything that determines a campaign besides the oracle itself.

    Parameters
    ----------
    space : DesignSpace
    n_initial : int
        Size of the space-filling initial design.
    n_max : int
        Total experiment budget; the loop adds exactly
        ``n_max - n_initial`` points.
    acquisition : str
        "ekld", "us" (uncertainty sampling) or "ei" (expected
        improvement toward the observed minimum).
    qoi : QoiSpec
    hmc : HmcConfig
        Per-iteration surrogate fit; its seed field is overridden with a
        derived per-iteration seed.
    bgo : BgoConfig, optional
        Inner-optimizer budget; defaults to the dimension-dependent
        preset.
    ekld : EkldConfig
        Sample counts of the EKLD estimator; ``m_posterior`` also sets
        how many posterior samples the campaign keeps for scoring and
        QoI summaries under every acquisition.
    kle_n_quad : int, optional
        Quadrature size of the expansion (module default when omitted).
    kle_beta : float
        Retained-energy fraction of the truncation.
    standardize_outputs : bool
        Standardize observations (dataset mean/sd) before each refit.
    refit_every : int
        Refit the posterior every k-th iteration, reusing the previous
        fit in between (1 = always refit).
    noise_variance : float
        Observation noise of the experiments.
    seed : int
    """

    space: DesignSpace
    n_initial: int = 5
    n_max: int = 30
    acquisition: str = "ekld"
    qoi: QoiSpec = field(default_factory=QoiSpec)
    hmc: HmcConfig = field(default_factory=HmcConfig)
    bgo: BgoConfig | None = None
    ekld: EkldConfig = field(default_factory=EkldConfig)
    kle_n_quad: int | None = None
    kle_beta: float = 0.95
    standardize_outputs: bool = False
    refit_every: int = 1
    noise_variance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_initial < 1:
            raise ValueError("n_initial must be at least 1")
        if not self.n_max > self.n_initial:
            raise ValueError("n_max must exceed n_initial")
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(
                f"unknown acquisition {self.acquisition!r}; "
                f"choose one of {ACQUISITIONS}")
        if self.refit_every < 1:
            raise ValueError("refit_every must be at least 1")
        if not self.noise_variance > 0.0:
            raise ValueError("noise_variance must be strictly positive")
        if self.bgo is None:
            object.__setattr__(self, "bgo", BgoConfig.for_dim(self.space.dim))

    @classmethod
    def desk_scale(cls, space: DesignSpace, **overrides) -> "CampaignConfig":
        """Reduced presets that keep a campaign interactive."""
        defaults = dict(
            hmc=HmcConfig.desk_scale(),
            ekld=EkldConfig.desk_scale(),
            kle_n_quad=200 if space.dim == 1 else 400,
        )
        defaults.update(overrides)
        return cls(space=space, **defaults)


@dataclass(frozen=True)
class IterationRecord:
    """One added experiment and the state of knowledge that chose it."""

    iteration: int        # 1-based index of the added experiment
    x: np.ndarray         # chosen design
    y: float              # raw observation
    qoi_mean: float       # raw-scale QoI summary before this observation
    qoi_lo: float         # 2.5th percentile, raw scale
    qoi_hi: float         # 97.5th percentile, raw scale
    qoi_mean_fit: float   # same summary on the fitting (standardized) scale
    qoi_lo_fit: float
    qoi_hi_fit: float
    acq_value: float      # acquisition score of the chosen design
    wall_ms: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())
        if not self.qoi_lo <= self.qoi_hi:
            raise ValueError("QoI band must satisfy lo <= hi")
        if self.wall_ms < 0.0:
            raise ValueError("wall_ms must be nonnegative")


@dataclass(frozen=True)
class CampaignTrace:
    """Complete record of one campaign."""

    records: tuple
    dataset: Dataset
    n_initial: int

    @property
    def n_added(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        """Per-iteration values of one record field, in order."""
        return np.asarray([getattr(r, name) for r in self.records])

    def band_widths(self) -> np.ndarray:
        return self.column("qoi_hi") - self.column("qoi_lo")


def summarize_pooled(draws: np.ndarray) -> tuple[float, float, float]:
    """Mean and empirical 2.5/97.5 percentiles of pooled QoI draws."""
    draws = np.asarray(draws, dtype=float).ravel()
    if draws.size == 0:
        raise ValueError("no QoI draws to summarize")
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return float(draws.mean()), float(lo), float(hi)


def qoi_summary(posterior, spec: QoiSpec, s_paths: int,
                inner_points: np.ndarray | None = None,
                rng: np.random.Generator | None = None):
    """Pooled QoI summary (mean, lo2.5, hi97.5) across posterior samples.

    Draws ``s_paths`` paths per posterior sample and pools them into one
    mixture sample, capturing both path variability and hyperparameter
    uncertainty.
    """
    expansions = [item[-1] if isinstance(item, (tuple, list)) else item
                  for item in posterior]
    if not expansions:
        raise ValueError("posterior must be nonempty")
    if rng is None:
        rng = np.random.default_rng(0)
    if inner_points is None:
        space = expansions[0].sample.data.space
        inner_points = draw_inner_points(spec, space, rng)
    pooled = np.concatenate([
        qoi_draws(exp, spec, inner_points, s_paths, rng) for exp in expansions
    ])
    return summarize_pooled(pooled)


def _fit_posterior(data: Dataset, cfg: CampaignConfig, fit_n: int):
    """HMC fit on the first ``fit_n`` observations; returns KLE expansions."""
    subset = Dataset(
        space=data.space,
        designs=data.designs[:fit_n],
        observations=data.observations[:fit_n],
        noise_variance=data.noise_variance,
    )
    if cfg.standardize_outputs:
        fit_data, shift, scale = subset.standardized()
    else:
        fit_data, shift, scale = subset, 0.0, 1.0

    prior = HyperpriorConfig.for_dim(cfg.space.dim)
    target = PosteriorTarget(fit_data, prior)
    init = target.initial_position(rng_for(cfg.seed, "hmc-init", fit_n))
    hmc_cfg = replace(cfg.hmc, seed=int_for(cfg.seed, "hmc", fit_n))
    chain = hmc_sample(target.log_density_and_grad, init, hmc_cfg)
    thinned = thin(chain, cfg.ekld.m_posterior)

    quad = lhs(
        cfg.kle_n_quad if cfg.kle_n_quad is not None
        else (500 if cfg.space.dim == 1 else 1000),
        cfg.space, seed=int_for(cfg.seed, "quad", fit_n))
    expansions: list[KleExpansion] = []
    for draw in thinned:
        sample = target.sample_from(draw)
        try:
            expansions.append(kle_build(sample, beta=cfg.kle_beta,
                                        quad_points=quad))
        except DegeneratePosteriorError:
            continue
    if len(expansions) < 2:
        raise DegeneratePosteriorError(
            "fewer than two posterior samples have usable spectra")
    return fit_data, shift, scale, expansions


def _unstandardize_summary(kind, summary, shift, scale):
    mean, lo, hi = summary
    if kind == "variance":
        return mean * scale ** 2, lo * scale ** 2, hi * scale ** 2
    return shift + scale * mean, shift + scale * lo, shift + scale * hi


def _select_next(data: Dataset, cfg: CampaignConfig,
                 inner_points: np.ndarray):
    """Fit, summarize, and pick the next design for the current dataset.

    Returns (x_next, acq_value, summary_fit, summary_raw).  All random
    streams are keyed by the dataset size, so the choice depends only on
    (data, cfg) — never on how many loop iterations preceded it.
    """
    n = data.n
    done = n - cfg.n_initial
    fit_n = cfg.n_initial + (done // cfg.refit_every) * cfg.refit_every

    fit_data, shift, scale, expansions = _fit_posterior(data, cfg, fit_n)

    summary_fit = qoi_summary(
        expansions, cfg.qoi, cfg.ekld.s_paths, inner_points,
        rng_for(cfg.seed, "qoi-summary", n))
    summary_raw = _unstandardize_summary(cfg.qoi.kind, summary_fit,
                                         shift, scale)

    bgo_cfg = replace(cfg.bgo, seed=int_for(cfg.seed, "bgo", n))
    if cfg.acquisition == "ekld":
        sweep = EkldSweep(
            expansions, cfg.qoi,
            replace(cfg.ekld, seed=int_for(cfg.seed, "ekld", n)),
            inner_points, noise_variance=fit_data.noise_variance)
        score_fn = lambda x: sweep.score(x).value
    elif cfg.acquisition == "us":
        samples = [exp.sample for exp in expansions]
        score_fn = lambda x: us_score(x, samples, fit_data)
    else:
        samples = [exp.sample for exp in expansions]
        best = float(fit_data.observations.min())
        score_fn = lambda x: ei_score(x, samples, fit_data, best)

    x_next, bgo_trace = maximize(score_fn, cfg.space, bgo_cfg)
    acq_value = float(bgo_trace.scores[bgo_trace.best_index])
    return x_next, acq_value, summary_fit, summary_raw


def initial_design(cfg: CampaignConfig) -> np.ndarray:
    """The space-filling design a fresh campaign starts from."""
    return lhs(cfg.n_initial, cfg.space, seed=int_for(cfg.seed, "init"))


def propose(data: Dataset, cfg: CampaignConfig) -> tuple[np.ndarray, float]:
    """The design the campaign would choose next from this dataset.

    Pure: identical (data, cfg) always yield the identical proposal, and
    it matches what ``run`` would select at the same state.
    """
    if data.n < cfg.n_initial:
        raise ValueError("need at least n_initial observations to propose")
    inner_points = draw_inner_points(cfg.qoi, cfg.space,
                                     rng_for(cfg.seed, "inner-points"))
    x_next, acq_value, _, _ = _select_next(data, cfg, inner_points)
    return x_next, acq_value


def run(oracle, cfg: CampaignConfig, init_data: Dataset | None = None,
        on_record=None) -> CampaignTrace:
    """Run (or resume) a sequential design campaign.

    Parameters
    ----------
    oracle : callable
        Maps a design (dim,) to a finite observation.
    cfg : CampaignConfig
    init_data : Dataset, optional
        Starting dataset.  Omitted: an LHS design of ``cfg.n_initial``
        points is generated and queried.  A dataset larger than
        ``n_initial`` resumes a partially completed campaign.
    on_record : callable, optional
        Called with (record, dataset_after_append) after every added
        experiment; exceptions propagate (use for incremental
        persistence).

    Returns
    -------
    CampaignTrace

    Raises
    ------
    OracleError
        When the oracle raises or returns a non-finite value; carries
        the records collected so far.
    """
    space = cfg.space
    records: list[IterationRecord] = []

    def query(x, dataset):
        try:
            value = float(oracle(x))
        except Exception as exc:
            raise OracleError(f"oracle failed at {x}: {exc}",
                              records, dataset) from exc
        if not np.isfinite(value):
            raise OracleError(f"oracle returned a non-finite value at {x}",
                              records, dataset)
        return value

    if init_data is None:
        designs = initial_design(cfg)
        data = Dataset(space=space,
                       designs=np.zeros((0, space.dim)),
                       observations=np.zeros(0),
                       noise_variance=cfg.noise_variance)
        for x in designs:
            data = data.append(x, query(x, data))
    else:
        if init_data.space.bounds.shape != space.bounds.shape or \
                not np.allclose(init_data.space.bounds, space.bounds):
            raise ValueError("init_data space does not match the config space")
        if init_data.n < cfg.n_initial:
            raise ValueError("init_data has fewer points than n_initial")
        data = init_data

    inner_points = draw_inner_points(cfg.qoi, space,
                                     rng_for(cfg.seed, "inner-points"))

    while data.n < cfg.n_max:
        start = time.perf_counter()
        x_next, acq_value, summary_fit, summary_raw = _select_next(
            data, cfg, inner_points)

        y_next = query(x_next, data)
        record = IterationRecord(
            iteration=data.n - cfg.n_initial + 1,
            x=x_next,
            y=y_next,
            qoi_mean=summary_raw[0], qoi_lo=summary_raw[1],
            qoi_hi=summary_raw[2],
            qoi_mean_fit=summary_fit[0], qoi_lo_fit=summary_fit[1],
            qoi_hi_fit=summary_fit[2],
            acq_value=acq_value,
            wall_ms=(time.perf_counter() - start) * 1e3,
        )
        records.append(record)
        data = data.append(x_next, y_next)
        if on_record is not None:
            on_record(record, data)

    return CampaignTrace(records=tuple(records), dataset=data,
                         n_initial=cfg.n_initial)
