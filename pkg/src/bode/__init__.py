"""Sequential Bayesian optimal design of experiments targeting quantities of interest."""

__version__ = "0.1.0"

from .acquisition import (
    AcquisitionScore,
    EkldConfig,
    EkldSweep,
    ei_score,
    ekld_score,
    expected_improvement,
    kld_gaussians,
    us_score,
)
from .benchmarks import (
    BENCHMARKS,
    Benchmark,
    ComparisonReport,
    ReportRow,
    benchmark_fn,
    compare,
    get_benchmark,
    global_moments,
    oracle_qoi,
)
from .bgo import BgoConfig, BgoTrace
from .campaign import (
    CampaignConfig,
    CampaignTrace,
    IterationRecord,
    OracleError,
    initial_design,
    propose,
    qoi_summary,
    summarize_pooled,
)
from .campaign import run as run_campaign
from .config import (
    CompareSettings,
    ConfigError,
    RunSetup,
    load_config,
    parse_config,
)
from .design import DesignSpace, lhs
from .hmc import Chain, HmcConfig, SamplerDivergenceError, thin
from .hmc import sample as hmc_sample
from .kle import (
    DegeneratePosteriorError,
    HypotheticalPosterior,
    KleExpansion,
    coefficient_update,
    condition_on_hypothetical,
    sample_path,
    spectral_truncate,
    truncation_count,
)
from .kle import build as kle_build
from .nsgp import (
    Dataset,
    HyperpriorConfig,
    LatentFieldValues,
    LatentHyperparams,
    PosteriorSample,
    PosteriorTarget,
    conditional_predict,
    latent_field_at,
    log_unnormalized_posterior,
)
from .qoi import (
    QoiMoments,
    QoiSpec,
    draw_inner_points,
    eval_qoi,
    moments_from_draws,
    qoi_draws,
    qoi_moments,
    qoi_of_values,
)
from .seeds import int_for, rng_for, subseed

__all__ = [
    "__version__",
    # design space and sampling
    "DesignSpace",
    "lhs",
    # non-stationary surrogate
    "Dataset",
    "HyperpriorConfig",
    "LatentFieldValues",
    "LatentHyperparams",
    "PosteriorSample",
    "PosteriorTarget",
    "conditional_predict",
    "latent_field_at",
    "log_unnormalized_posterior",
    # posterior sampling
    "Chain",
    "HmcConfig",
    "SamplerDivergenceError",
    "hmc_sample",
    "thin",
    # spectral path representation
    "DegeneratePosteriorError",
    "HypotheticalPosterior",
    "KleExpansion",
    "coefficient_update",
    "condition_on_hypothetical",
    "kle_build",
    "sample_path",
    "spectral_truncate",
    "truncation_count",
    # quantities of interest
    "QoiMoments",
    "QoiSpec",
    "draw_inner_points",
    "eval_qoi",
    "moments_from_draws",
    "qoi_draws",
    "qoi_moments",
    "qoi_of_values",
    # acquisition scores
    "AcquisitionScore",
    "EkldConfig",
    "EkldSweep",
    "ei_score",
    "ekld_score",
    "expected_improvement",
    "kld_gaussians",
    "us_score",
    # inner optimizer
    "BgoConfig",
    "BgoTrace",
    # campaigns
    "CampaignConfig",
    "CampaignTrace",
    "IterationRecord",
    "OracleError",
    "initial_design",
    "propose",
    "qoi_summary",
    "run_campaign",
    "summarize_pooled",
    # benchmarks and comparisons
    "BENCHMARKS",
    "Benchmark",
    "ComparisonReport",
    "ReportRow",
    "benchmark_fn",
    "compare",
    "get_benchmark",
    "global_moments",
    "oracle_qoi",
    # configuration files
    "CompareSettings",
    "ConfigError",
    "RunSetup",
    "load_config",
    "parse_config",
    # deterministic seed derivation
    "int_for",
    "rng_for",
    "subseed",
]
