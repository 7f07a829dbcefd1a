"""Campaign configuration files.

A campaign is configured by a single YAML file with nested sections::

    benchmark: gaussian-mixture   # or: oracle: "python3 simulator.py"
    campaign:
      n_initial: 5
      n_max: 30
      acquisition: ekld           # ekld | us | ei
      seed: 0
    qoi:
      kind: expectation           # expectation | variance | minimum |
      alpha: 0.025                #   maximum | percentile
      n_inner: 2000
    hmc:
      n_samples: 11500
      burn_in: 1500
      thin_to: 50
    ekld:
      m_posterior: 50
      b_hypothetical: 50
      s_paths: 50
    bgo:
      n_init: 10
      n_total: 30
      n_candidates: 500
      tol: 1.0e-6
    kle:
      n_quad: 500
      beta: 0.95
    compare:                      # only read by the compare command
      benchmarks: [gaussian-mixture]
      acquisitions: [ekld, us]
      replications: 3

Every key is optional and defaults to the stock value (or the reduced
interactive preset when desk scale is requested); unknown keys are
errors, reported with the line they appear on.  An external oracle
command requires a ``space: {bounds: [[lo, hi], ...]}`` section; a named
benchmark brings its own domain.

Any key can also be overridden through the environment: ``BODE_`` plus
the upper-cased key path with ``__`` between levels, e.g.
``BODE_CAMPAIGN__N_MAX=12`` or ``BODE_QOI__ALPHA=0.05``.  Environment
values are parsed as YAML scalars and are validated like file values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .acquisition import EkldConfig
from .benchmarks import Benchmark, get_benchmark
from .bgo import BgoConfig
from .campaign import CampaignConfig
from .design import DesignSpace
from .hmc import HmcConfig
from .qoi import QoiSpec

ENV_PREFIX = "BODE_"

# section -> allowed keys (None marks a top-level scalar/list key)
_SCHEMA = {
    "benchmark": None,
    "oracle": None,
    "space": {"bounds"},
    "campaign": {"n_initial", "n_max", "acquisition", "standardize_outputs",
                 "refit_every", "noise_variance", "seed"},
    "qoi": {"kind", "alpha", "n_inner"},
    "hmc": {"n_samples", "burn_in", "leapfrog_steps", "step_size",
            "adapt_during_burnin", "target_accept", "thin_to"},
    "ekld": {"m_posterior", "b_hypothetical", "s_paths"},
    "bgo": {"n_init", "n_total", "n_candidates", "tol"},
    "kle": {"n_quad", "beta"},
    "compare": {"benchmarks", "acquisitions", "replications", "n_oracle"},
}


class ConfigError(ValueError):
    """Invalid configuration, anchored to where the offending value came from.

    ``anchor`` is a 1-based line number of the config file, or a string
    such as ``"environment variable BODE_QOI__ALPHA"``.
    """

    def __init__(self, message: str, anchor=None):
        self.anchor = anchor
        if isinstance(anchor, int):
            message = f"line {anchor}: {message}"
        elif anchor:
            message = f"{anchor}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CompareSettings:
    """Inputs of a comparison study (the compare command)."""

    benchmarks: tuple
    acquisitions: tuple
    replications: int = 3
    n_oracle: int = 200_000


@dataclass(frozen=True)
class RunSetup:
    """Everything a command needs, resolved from one config file."""

    campaign: CampaignConfig | None
    benchmark: Benchmark | None
    oracle_command: str | None
    compare: CompareSettings | None
    resolved: dict = field(repr=False)  # merged file + env values


def _collect_lines(text: str) -> dict:
    """Map each (nested) key path to the line its key appears on."""
    lines: dict = {}
    node = yaml.compose(text)

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key_path = path + (str(key_node.value),)
                lines[key_path] = key_node.start_mark.line + 1
                walk(value_node, key_path)

    walk(node, ())
    return lines


def _parse_env_overrides(env) -> list:
    """(key path, parsed value, anchor string) per BODE_ variable."""
    overrides = []
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        path = tuple(name[len(ENV_PREFIX):].lower().split("__"))
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError:
            value = env[name]
        overrides.append((path, value, f"environment variable {name}"))
    return overrides


def _check_schema(data: dict, lines: dict):
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lines.get((key,)))
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"section {key!r} must hold nested keys",
                              lines.get((key,)))
        for sub in value:
            if sub not in allowed:
                raise ConfigError(
                    f"unknown key {sub!r} in section {key!r}"
                    f" (allowed: {', '.join(sorted(allowed))})",
                    lines.get((key, sub)))


def _anchor_for(section: str, section_data: dict, lines: dict, message: str):
    """Best line anchor for a construction error: the named field if the
    message mentions one, else the section."""
    for sub in section_data:
        if sub in message:
            return lines.get((section, sub), lines.get((section,)))
    return lines.get((section,))


def _build_section(section: str, data: dict, lines: dict, factory,
                   defaults: dict):
    merged = dict(defaults)
    merged.update(data.get(section) or {})
    try:
        return factory(**merged)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {section} settings: {exc}",
                          _anchor_for(section, data.get(section) or {},
                                      lines, str(exc))) from exc


def parse_config(text: str, desk_scale: bool = False,
                 seed: int | None = None, env=None) -> RunSetup:
    """Parse, merge with environment overrides, validate, and construct.

    Parameters
    ----------
    text : str
        YAML config file contents.
    desk_scale : bool
        Start from the reduced interactive presets instead of the stock
        defaults (explicit file/env values still win).
    seed : int, optional
        Overrides the campaign seed (the --seed flag).
    env : mapping, optional
        Environment to read ``BODE_*`` overrides from (defaults to
        ``os.environ``).

    Raises
    ------
    ConfigError
        Unknown keys, malformed sections, or values rejected by the
        component being configured; the message is anchored to the
        config line or environment variable responsible.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"config is not valid YAML: {exc}",
                          mark.line + 1 if mark else None) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("the top level must be a mapping of sections", 1)
    lines = _collect_lines(text)

    for path, value, anchor in _parse_env_overrides(
            os.environ if env is None else env):
        target = data
        for part in path[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(
                    f"override path {'.'.join(path)} crosses a scalar",
                    anchor)
        target[path[-1]] = value
        lines[path] = anchor

    _check_schema(data, lines)

    benchmark = None
    if "benchmark" in data:
        try:
            benchmark = get_benchmark(data["benchmark"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), lines.get(("benchmark",))) from exc
    oracle_command = data.get("oracle")
    if benchmark is not None and oracle_command is not None:
        raise ConfigError("give either a benchmark or an oracle, not both",
                          lines.get(("oracle",)))

    space = None
    if benchmark is not None:
        if "space" in data:
            raise ConfigError(
                "a named benchmark fixes its own space; drop the section",
                lines.get(("space",)))
        space = benchmark.domain
    elif "space" in data:
        try:
            space = DesignSpace(
                bounds=np.asarray(data["space"]["bounds"], dtype=float))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"invalid space bounds: {exc}",
                              lines.get(("space", "bounds"),
                                        lines.get(("space",)))) from exc
    elif oracle_command is not None:
        raise ConfigError("an oracle command needs a space section with "
                          "bounds", lines.get(("oracle",)))

    campaign = None
    if space is not None:
        dim = space.dim
        qoi = _build_section("qoi", data, lines, QoiSpec, {})
        hmc = _build_section(
            "hmc", data, lines, HmcConfig,
            dict(n_samples=1500, burn_in=500, thin_to=20) if desk_scale
            else {})
        ekld = _build_section(
            "ekld", data, lines, EkldConfig,
            dict(m_posterior=20, b_hypothetical=20, s_paths=20)
            if desk_scale else {})
        bgo = _build_section("bgo", data, lines, BgoConfig,
                             dict(n_total=30 if dim == 1 else 40))
        kle = dict(data.get("kle") or {})
        if desk_scale:
            kle.setdefault("n_quad", 200 if dim == 1 else 400)
        if kle.get("n_quad") is not None and kle["n_quad"] < 2:
            raise ConfigError("kle n_quad must be at least 2",
                              lines.get(("kle", "n_quad")))
        beta = kle.get("beta", 0.95)
        if not 0.0 < beta <= 1.0:
            raise ConfigError("kle beta must lie in (0, 1]",
                              lines.get(("kle", "beta")))

        campaign_defaults = dict(
            space=space,
            qoi=qoi, hmc=hmc, ekld=ekld, bgo=bgo,
            kle_n_quad=kle.get("n_quad"),
            kle_beta=beta,
        )
        if benchmark is not None:
            campaign_defaults["standardize_outputs"] = benchmark.standardize
        campaign = _build_section("campaign", data, lines, CampaignConfig,
                                  campaign_defaults)
        if seed is not None:
            from dataclasses import replace
            campaign = replace(campaign, seed=int(seed))

    compare = None
    if "compare" in data:
        section = dict(data["compare"])
        section["benchmarks"] = tuple(section.get("benchmarks", ()))
        section["acquisitions"] = tuple(section.get("acquisitions", ()))
        try:
            compare = CompareSettings(**section)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid compare settings: {exc}",
                              _anchor_for("compare", data["compare"], lines,
                                          str(exc))) from exc
        if not compare.benchmarks or not compare.acquisitions:
            raise ConfigError(
                "compare needs benchmarks and acquisitions lists",
                lines.get(("compare",)))
        if compare.replications < 1:
            raise ConfigError("replications must be at least 1",
                              lines.get(("compare", "replications"),
                                        lines.get(("compare",))))
        for name in compare.benchmarks:
            try:
                get_benchmark(name)
            except ValueError as exc:
                raise ConfigError(str(exc),
                                  lines.get(("compare", "benchmarks"))) \
                    from exc

    return RunSetup(campaign=campaign, benchmark=benchmark,
                    oracle_command=oracle_command, compare=compare,
                    resolved=data)


def load_config(path, desk_scale: bool = False, seed: int | None = None,
                env=None) -> RunSetup:
    """``parse_config`` on a file path."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), desk_scale=desk_scale, seed=seed,
                            env=env)
