"""Synthetic benchmark functions with brute-force QoI ground truth.

Four closed-form test functions exercise the campaign machinery:

- ``sine-chirp``: 1-D sine with exponentially accelerating phase; smooth
  but increasingly wavy toward the right edge of [0, 1].
- ``gaussian-mixture``: sum of two narrow normal densities on [0, 1];
  nearly flat except for two sharp bumps, the classic non-stationary
  stress test.  Its uniform-measure moments are analytic.
- ``curved-valley``: 3-D curved ridge on [-2, 6]^3 (inputs are rescaled
  to the unit cube before the formula so the square root stays real).
- ``shifted-friedman``: 5-D Friedman-style function on [0, 1]^5 with a
  large additive offset from its quadratic term.

Benchmarks whose interesting structure lives at a large raw scale carry
``standardize=True``: campaigns should model the standardized output,
and ``oracle_qoi`` evaluates the globally standardized function
(f - mean)/sd with moments taken under the uniform measure.  Reference
QoI values carry a provenance tag: "analytic" when derived in closed
form, "oracle" when computed by the brute-force oracle (dense midpoint
quadrature in 1-D, seeded Monte Carlo otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.stats import norm

from .design import DesignSpace, lhs  # noqa: F401  (lhs re-exported)
from .qoi import QoiSpec, qoi_of_values

DEFAULT_ORACLE_N = 1_000_000


def _sine_chirp(x: np.ndarray) -> np.ndarray:
    t = x[:, 0]
    return 4.0 * (1.0 - np.sin(6.0 * t + 8.0 * np.exp(6.0 * t - 7.0)))


def _gaussian_mixture(x: np.ndarray) -> np.ndarray:
    t = x[:, 0]
    return norm.pdf(t, 0.2, 0.05) + norm.pdf(t, 0.8, 0.05)


def _curved_valley(x: np.ndarray) -> np.ndarray:
    u = (x + 2.0) / 8.0  # rescale [-2, 6]^3 to the unit cube
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    return (4.0 * (u1 + 8.0 * u2 - 8.0 * u2 ** 2 - 2.0) ** 2
            + (3.0 - 4.0 * u2) ** 2
            + 16.0 * np.sqrt(u3 + 1.0) * (2.0 * u3 - 1.0) ** 2)


def _shifted_friedman(x: np.ndarray) -> np.ndarray:
    return (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
            + 20.0 * (x[:, 2] - 5.0) ** 2
            + 10.0 * x[:, 3] + 5.0 * x[:, 4])


@dataclass(frozen=True)
class Benchmark:
    """A closed-form test function with QoI ground truth.

    ``reference_qois`` maps a QoI kind to ``(value, provenance)`` where
    provenance is "analytic" or "oracle"; values refer to the raw
    function when ``standardize`` is False and to the globally
    standardized function otherwise.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    domain: DesignSpace
    standardize: bool
    reference_qois: Mapping[str, tuple[float, str]]
    description: str = ""

    def evaluate(self, x: np.ndarray):
        """Function value at one point (float) or a batch (vector)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        batch = np.atleast_2d(x)
        if batch.shape[1] != self.domain.dim:
            raise ValueError(
                f"{self.name} expects {self.domain.dim}-dimensional inputs, "
                f"got shape {x.shape}")
        if not self.domain.contains(batch):
            raise ValueError(f"input outside the {self.name} domain")
        values = self.fn(batch)
        return float(values[0]) if single else values


_UNIT = DesignSpace(bounds=[[0.0, 1.0]])

BENCHMARKS: dict[str, Benchmark] = {
    "sine-chirp": Benchmark(
        name="sine-chirp",
        fn=_sine_chirp,
        domain=_UNIT,
        standardize=True,
        reference_qois={
            "expectation": (0.0, "analytic"),
            "variance": (1.0, "analytic"),
            "minimum": (-1.16771, "oracle"),
            "maximum": (1.75146, "oracle"),
            "percentile": (-1.16522, "oracle"),
        },
        description="1-D chirp 4(1 - sin(6x + 8 exp(6x - 7))) on [0, 1]",
    ),
    "gaussian-mixture": Benchmark(
        name="gaussian-mixture",
        fn=_gaussian_mixture,
        domain=_UNIT,
        standardize=False,
        reference_qois={
            "expectation": (2.0, "analytic"),
            "variance": (7.283792, "analytic"),
            "minimum": (0.0, "analytic"),
            "maximum": (7.978846, "analytic"),
            "percentile": (0.0, "analytic"),
        },
        description="sum of two normal densities (sd 0.05 at 0.2, 0.8)",
    ),
    "curved-valley": Benchmark(
        name="curved-valley",
        fn=_curved_valley,
        domain=DesignSpace(bounds=[[-2.0, 6.0]] * 3),
        standardize=True,
        reference_qois={
            "expectation": (0.0, "analytic"),
            "variance": (1.0, "analytic"),
            "minimum": (-1.4772, "oracle"),
            "maximum": (5.0061, "oracle"),
            "percentile": (-1.3832, "oracle"),
        },
        description="3-D curved ridge, inputs rescaled to the unit cube",
    ),
    "shifted-friedman": Benchmark(
        name="shifted-friedman",
        fn=_shifted_friedman,
        domain=DesignSpace(bounds=[[0.0, 1.0]] * 5),
        standardize=True,
        reference_qois={
            "expectation": (0.0, "analytic"),
            "variance": (1.0, "analytic"),
            "minimum": (-1.8970, "oracle"),
            "maximum": (2.0013, "oracle"),
            "percentile": (-1.5974, "oracle"),
        },
        description="5-D Friedman-style function with a large offset term",
    ),
}


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise ValueError(
            f"unknown benchmark {name!r}; available: "
            f"{', '.join(sorted(BENCHMARKS))}") from None


def benchmark_fn(name: str, x: np.ndarray):
    """Evaluate a named benchmark at one point or a batch of points."""
    return get_benchmark(name).evaluate(x)


def _as_benchmark(bench) -> Benchmark:
    return bench if isinstance(bench, Benchmark) else get_benchmark(bench)


def _oracle_values(bench: Benchmark, n_oracle: int, seed: int) -> np.ndarray:
    """Dense function values under the uniform measure on the domain.

    1-D uses the midpoint grid (deterministic quadrature); higher
    dimensions use seeded Monte Carlo.
    """
    space = bench.domain
    if space.dim == 1:
        grid = space.lower + (space.upper - space.lower) * (
            (np.arange(n_oracle) + 0.5) / n_oracle)
        return bench.fn(grid[:, None])
    rng = np.random.default_rng(seed)
    return bench.fn(space.uniform(n_oracle, rng))


def global_moments(name, n_oracle: int = DEFAULT_ORACLE_N,
                   seed: int = 0) -> tuple[float, float]:
    """Uniform-measure mean and standard deviation of the raw function."""
    values = _oracle_values(_as_benchmark(name), n_oracle, seed)
    return float(values.mean()), float(values.std())


def oracle_qoi(name, spec: QoiSpec, n_oracle: int = DEFAULT_ORACLE_N,
               seed: int = 0) -> float:
    """Brute-force ground-truth QoI for a benchmark (by name or instance).

    Evaluated on the raw function, or on the globally standardized one
    when the benchmark carries ``standardize=True``.
    """
    bench = _as_benchmark(name)
    values = _oracle_values(bench, n_oracle, seed)
    if bench.standardize:
        values = (values - values.mean()) / values.std()
    return float(qoi_of_values(values, spec))


# ---------------------------------------------------------------------------
# Acquisition comparison harness


@dataclass(frozen=True)
class ReportRow:
    """Error quartiles of one (benchmark, acquisition) cell at one iteration."""

    benchmark: str
    acquisition: str
    iteration: int
    median_abs_error: float
    q25_abs_error: float
    q75_abs_error: float
    n_replications: int   # completed replications behind the quartiles


@dataclass(frozen=True)
class ComparisonReport:
    """Per-iteration QoI-error summary of a multi-method comparison study.

    ``rows`` always holds exactly benchmarks x acquisitions x iterations
    entries; cells with no completed replication carry NaN errors.
    ``traces`` maps (benchmark, acquisition) to the completed campaign
    traces, ``errors`` maps the same keys to the absolute-error matrix
    (completed replications x iterations) on the comparison scale,
    ``references`` maps benchmark name to the ground-truth QoI, and
    ``failures`` lists (benchmark, acquisition, replication, message)
    for aborted campaigns.
    """

    rows: tuple
    traces: Mapping
    errors: Mapping
    references: Mapping
    failures: tuple
    n_iterations: int

    def rows_for(self, benchmark: str, acquisition: str) -> list:
        return [r for r in self.rows
                if r.benchmark == benchmark and r.acquisition == acquisition]

    def final_errors(self, benchmark: str, acquisition: str) -> np.ndarray:
        """Per-replication |QoI estimate - truth| at the last iteration."""
        return self.errors[(benchmark, acquisition)][:, -1]


def _comparison_scale(value: float, kind: str, mu: float, sd: float) -> float:
    """Map a raw-scale QoI onto the globally standardized output scale."""
    if kind == "variance":
        return value / sd ** 2
    return (value - mu) / sd


def compare(benchmarks, acquisitions, replications: int,
            cfg=None, n_oracle: int = 200_000) -> ComparisonReport:
    """Run repeated campaigns per (benchmark, acquisition) and rank errors.

    Parameters
    ----------
    benchmarks : iterable
        Benchmark names or instances.
    acquisitions : iterable of str
        Acquisition names understood by the campaign runner.
    replications : int
        Seeded repeats per cell; each gets a distinct derived seed.
    cfg : CampaignConfig, optional
        Template configuration.  Its space, acquisition, output
        standardization and seed are overridden per cell; everything
        else (budgets, QoI, sampler settings) is taken as given.  When
        omitted, the reduced interactive preset is used.
    n_oracle : int
        Brute-force sample size behind the ground-truth QoI values.

    Returns
    -------
    ComparisonReport
        Absolute QoI error |estimate - truth| per iteration, summarized
        by median and interquartile range across replications.  For
        benchmarks flagged ``standardize`` the errors are measured on
        the globally standardized output scale; campaign failures leave
        the cell incomplete rather than aborting the study.
    """
    from dataclasses import replace as _replace

    from .campaign import CampaignConfig, run
    from .seeds import int_for

    if replications < 1:
        raise ValueError("replications must be at least 1")
    bench_list = [_as_benchmark(b) for b in benchmarks]
    acq_list = list(acquisitions)
    if not bench_list or not acq_list:
        raise ValueError("need at least one benchmark and one acquisition")

    base_seed = cfg.seed if cfg is not None else 0
    rows = []
    traces: dict = {}
    errors: dict = {}
    references: dict = {}
    failures = []
    n_iterations = None

    for bench in bench_list:
        if bench.standardize:
            mu, sd = global_moments(bench, n_oracle=n_oracle, seed=0)
        else:
            mu, sd = 0.0, 1.0

        for acq in acq_list:
            cell: list = []
            spec = None
            for rep in range(replications):
                seed = int_for(base_seed, bench.name, acq, rep)
                if cfg is None:
                    cell_cfg = CampaignConfig.desk_scale(
                        bench.domain, acquisition=acq,
                        standardize_outputs=bench.standardize, seed=seed)
                else:
                    cell_cfg = _replace(
                        cfg, space=bench.domain, acquisition=acq,
                        standardize_outputs=bench.standardize, seed=seed)
                spec = cell_cfg.qoi
                if n_iterations is None:
                    n_iterations = cell_cfg.n_max - cell_cfg.n_initial
                try:
                    cell.append(run(bench.evaluate, cell_cfg))
                except Exception as exc:
                    failures.append((bench.name, acq, rep, str(exc)))
            traces[(bench.name, acq)] = tuple(cell)

            if bench.name not in references:
                references[bench.name] = oracle_qoi(
                    bench, spec, n_oracle=n_oracle, seed=0)
            ref = references[bench.name]

            cell_errors = np.asarray([
                [abs(_comparison_scale(r.qoi_mean, spec.kind, mu, sd) - ref)
                 for r in t.records]
                for t in cell
            ]).reshape(len(cell), n_iterations)
            errors[(bench.name, acq)] = cell_errors

            for it in range(1, n_iterations + 1):
                col = cell_errors[:, it - 1]
                if col.size:
                    q25, med, q75 = np.percentile(col, [25.0, 50.0, 75.0])
                else:
                    q25 = med = q75 = np.nan
                rows.append(ReportRow(
                    benchmark=bench.name, acquisition=acq, iteration=it,
                    median_abs_error=float(med), q25_abs_error=float(q25),
                    q75_abs_error=float(q75), n_replications=int(col.size)))

    return ComparisonReport(rows=tuple(rows), traces=traces, errors=errors,
                            references=references, failures=tuple(failures),
                            n_iterations=n_iterations)
