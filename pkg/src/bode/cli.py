"""Command-line surface and on-disk campaign state.

A campaign lives in a state directory::

    out/
      manifest.json   # config snapshot, seed, version, status, file refs
      dataset.csv     # x_1..x_d, y  (every observation, initial included)
      trace.csv       # iter, x_1..x_d, y, qoi_mean, qoi_lo2.5,
                      #   qoi_hi97.5, acq_value, wall_ms
      .lock           # present only while a command is running

Subcommands
-----------
run
    Execute a full campaign from a config file, persisting every
    observation as it arrives; ``--resume`` continues an interrupted one.
resume
    Continue the campaign in a state directory to its budget.
suggest
    Print the next design (one CSV row) without mutating state — the
    human-in-the-loop mode where experiments happen offline.
record
    Append an externally obtained observation to the dataset.
compare
    Run the acquisition comparison study described by the config's
    ``compare`` section and write per-iteration error quartiles.
oracle-qoi
    Print the brute-force ground-truth QoI of a builtin benchmark.

Exit codes: 0 success, 2 invalid configuration or state (message names
the offending field and config line), 3 oracle failure (partial trace
persisted).  All floats are written with ``repr`` so files round-trip
bit-exactly; rerunning with the same seed reproduces a trace exactly
except for the wall-clock column.  Resume replays the config snapshot
stored in the manifest, so later environment changes cannot alter a
campaign in flight.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .benchmarks import compare as run_compare, get_benchmark, oracle_qoi
from .campaign import (
    CampaignConfig,
    OracleError,
    initial_design,
    propose,
    run as run_campaign,
)
from .config import ConfigError, RunSetup, load_config, parse_config
from .nsgp import Dataset
from .qoi import QoiSpec

MANIFEST = "manifest.json"
DATASET = "dataset.csv"
TRACE = "trace.csv"
LOCK = ".lock"

TRACE_FIXED = ("y", "qoi_mean", "qoi_lo2.5", "qoi_hi97.5", "acq_value",
               "wall_ms")


class CliError(Exception):
    """User-facing failure with a dedicated exit code."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# State-directory primitives


@contextmanager
def state_lock(out_dir: Path):
    """Fail fast when another invocation holds the directory."""
    path = Path(out_dir) / LOCK
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CliError(
            f"state directory is locked by another invocation ({path}); "
            "remove the file if that process is gone") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        os.unlink(path)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def save_manifest(out_dir: Path, manifest: dict):
    path = Path(out_dir) / MANIFEST
    tmp = path.with_suffix(".json.tmp")
    manifest = dict(manifest, updated=_now())
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_manifest(out_dir: Path) -> dict:
    path = Path(out_dir) / MANIFEST
    if not path.exists():
        raise CliError(f"no campaign manifest at {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _set_status(out_dir: Path, manifest: dict, status: str):
    manifest["status"] = status
    save_manifest(out_dir, manifest)


def trace_header(dim: int) -> str:
    xs = ",".join(f"x_{i + 1}" for i in range(dim))
    return f"iter,{xs}," + ",".join(TRACE_FIXED)


def dataset_header(dim: int) -> str:
    xs = ",".join(f"x_{i + 1}" for i in range(dim))
    return f"{xs},y"


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def append_line(path: Path, line: str):
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def trace_row(record, dim: int) -> str:
    x = np.asarray(record.x, dtype=float)
    if x.size != dim:
        raise ValueError(f"record design has {x.size} coordinates, "
                         f"expected {dim}")
    return f"{record.iteration}," + _row(x) + "," + _row([
        record.y, record.qoi_mean, record.qoi_lo, record.qoi_hi,
        record.acq_value, record.wall_ms])


def read_trace(path: Path) -> tuple[list, list]:
    """Parse a trace CSV into (header fields, row dicts).

    Floats round-trip exactly; writing the parsed rows back produces the
    identical file.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise CliError(f"trace file {path} is empty")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise CliError(f"trace row has {len(parts)} fields, "
                           f"header has {len(header)}: {ln!r}")
        row = {name: (int(v) if name == "iter" else float(v))
               for name, v in zip(header, parts)}
        rows.append(row)
    return header, rows


def write_trace(path: Path, header: list, rows: list):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fields = [str(row["iter"])] + [repr(float(row[h]))
                                           for h in header[1:]]
            fh.write(",".join(fields) + "\n")


def read_dataset(path: Path, cfg: CampaignConfig) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    dim = cfg.space.dim
    designs, observations = [], []
    for ln in lines[1:]:
        parts = [float(v) for v in ln.split(",")]
        if len(parts) != dim + 1:
            raise CliError(f"dataset row has {len(parts)} fields, "
                           f"expected {dim + 1}: {ln!r}")
        designs.append(parts[:dim])
        observations.append(parts[dim])
    return Dataset(space=cfg.space,
                   designs=np.asarray(designs).reshape(len(designs), dim),
                   observations=np.asarray(observations),
                   noise_variance=cfg.noise_variance)


# ---------------------------------------------------------------------------
# Oracles


def command_oracle(command: str):
    """Wrap a subprocess as the experiment oracle.

    Protocol: the command receives one design per line on stdin as
    comma-separated decimals and prints one decimal per line on stdout;
    a nonzero exit aborts the campaign.
    """
    argv = shlex.split(command)

    def oracle(x):
        line = _row(np.atleast_1d(x)) + "\n"
        proc = subprocess.run(argv, input=line, capture_output=True,
                              text=True)
        if proc.returncode != 0:
            raise RuntimeError(
                f"oracle command exited with status {proc.returncode}"
                + (f": {proc.stderr.strip()}" if proc.stderr.strip() else ""))
        out = proc.stdout.strip().splitlines()
        if not out:
            raise RuntimeError("oracle command printed no output")
        return float(out[0])

    return oracle


def _oracle_for(setup: RunSetup):
    if setup.benchmark is not None:
        return setup.benchmark.evaluate
    if setup.oracle_command is not None:
        return command_oracle(setup.oracle_command)
    raise CliError("config must name a builtin benchmark or an oracle "
                   "command")


def _campaign_of(setup: RunSetup) -> CampaignConfig:
    if setup.campaign is None:
        raise CliError("config must name a builtin benchmark or an oracle "
                       "command with a space section")
    return setup.campaign


# ---------------------------------------------------------------------------
# Campaign persistence


def _fresh_manifest(setup: RunSetup, desk_scale: bool) -> dict:
    cfg = setup.campaign
    return {
        "version": __version__,
        "status": "running",
        "seed": cfg.seed,
        "desk_scale": bool(desk_scale),
        "config": setup.resolved,
        "trace_files": [TRACE, DATASET],
        "n_initial": cfg.n_initial,
        "n_max": cfg.n_max,
        "created": _now(),
    }


def _setup_from_manifest(manifest: dict) -> RunSetup:
    text = yaml.safe_dump(manifest["config"])
    return parse_config(text, desk_scale=manifest.get("desk_scale", False),
                        seed=manifest.get("seed"), env={})


def _drive_campaign(out_dir: Path, setup: RunSetup, manifest: dict,
                    data: Dataset | None) -> int:
    """Run (or continue) a campaign, persisting every step; returns exit code."""
    cfg = _campaign_of(setup)
    oracle = _oracle_for(setup)
    dim = cfg.space.dim
    trace_path = Path(out_dir) / TRACE
    dataset_path = Path(out_dir) / DATASET

    if data is None:
        data = Dataset(space=cfg.space,
                       designs=np.zeros((0, dim)), observations=np.zeros(0),
                       noise_variance=cfg.noise_variance)
    if data.n < cfg.n_initial:
        # evaluate the (rest of the) initial design, persisting as we go
        for x in initial_design(cfg)[data.n:]:
            try:
                y = float(oracle(x))
                if not np.isfinite(y):
                    raise RuntimeError("oracle returned a non-finite value")
            except Exception as exc:
                print(f"oracle failed during initialization: {exc}",
                      file=sys.stderr)
                _set_status(out_dir, manifest, "aborted")
                return 3
            data = data.append(x, y)
            append_line(dataset_path, _row(list(x) + [y]))

    if data.n >= cfg.n_max:
        _set_status(out_dir, manifest, "done")
        print(f"campaign already complete: {data.n} experiments")
        return 0

    def persist(record, dataset):
        append_line(trace_path, trace_row(record, dim))
        append_line(dataset_path, _row(list(record.x) + [record.y]))

    try:
        run_campaign(oracle, cfg, init_data=data, on_record=persist)
    except OracleError as exc:
        print(f"oracle failed: {exc}", file=sys.stderr)
        _set_status(out_dir, manifest, "aborted")
        return 3
    _set_status(out_dir, manifest, "done")
    print(f"campaign complete: {cfg.n_max} experiments, trace in "
          f"{trace_path}")
    return 0


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args) -> int:
    setup = load_config(args.config, desk_scale=args.desk_scale,
                        seed=args.seed)
    cfg = _campaign_of(setup)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if (out_dir / MANIFEST).exists():
        if not args.resume:
            raise CliError(f"{out_dir} already holds a campaign; rerun with "
                           "--resume to continue it")
        return cmd_resume(args)

    with state_lock(out_dir):
        # data files first so the manifest never references missing files
        append_line(out_dir / DATASET, dataset_header(cfg.space.dim))
        append_line(out_dir / TRACE, trace_header(cfg.space.dim))
        manifest = _fresh_manifest(setup, args.desk_scale)
        save_manifest(out_dir, manifest)
        return _drive_campaign(out_dir, setup, manifest, data=None)


def cmd_resume(args) -> int:
    out_dir = Path(args.out)
    with state_lock(out_dir):
        manifest = load_manifest(out_dir)
        setup = _setup_from_manifest(manifest)
        cfg = _campaign_of(setup)
        data = read_dataset(out_dir / DATASET, cfg)
        _set_status(out_dir, manifest, "running")
        return _drive_campaign(out_dir, setup, manifest, data=data)


def cmd_suggest(args) -> int:
    out_dir = Path(args.out)
    with state_lock(out_dir):
        manifest = load_manifest(out_dir)
        setup = _setup_from_manifest(manifest)
        cfg = _campaign_of(setup)
        data = read_dataset(out_dir / DATASET, cfg)
        if data.n == 0:
            raise CliError("no observations recorded yet; run the campaign "
                           "or record initial experiments first")
        if data.n < cfg.n_initial:
            x = initial_design(cfg)[data.n]
        else:
            x, _ = propose(data, cfg)
    print(_row(x))
    return 0


def cmd_record(args) -> int:
    out_dir = Path(args.out)
    try:
        x = np.asarray([float(v) for v in str(args.x).split(",")])
        y = float(args.y)
    except ValueError as exc:
        raise CliError(f"malformed observation: {exc}") from exc
    if not np.isfinite(x).all() or not np.isfinite(y):
        raise CliError("observation values must be finite")

    with state_lock(out_dir):
        manifest = load_manifest(out_dir)
        setup = _setup_from_manifest(manifest)
        cfg = _campaign_of(setup)
        if x.size != cfg.space.dim:
            raise CliError(f"design has {x.size} coordinates, the space "
                           f"has {cfg.space.dim}")
        if not cfg.space.contains(x):
            raise CliError(f"design {args.x} lies outside the design space")
        data = read_dataset(out_dir / DATASET, cfg)
        if data.n and np.any(np.all(np.isclose(data.designs, x), axis=1)):
            print("warning: design duplicates an existing experiment; "
                  "recording as a repeated noisy observation",
                  file=sys.stderr)
        append_line(out_dir / DATASET, _row(list(x) + [y]))
        save_manifest(out_dir, manifest)
    print(f"recorded observation {data.n + 1}")
    return 0


def cmd_compare(args) -> int:
    setup = load_config(args.config, desk_scale=args.desk_scale,
                        seed=args.seed)
    if setup.compare is None:
        raise CliError("config has no compare section")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = run_compare(setup.compare.benchmarks,
                         setup.compare.acquisitions,
                         setup.compare.replications,
                         cfg=setup.campaign,
                         n_oracle=setup.compare.n_oracle)

    path = out_dir / "comparison.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("benchmark,acquisition,iteration,median_abs_error,"
                 "q25_abs_error,q75_abs_error,n_replications\n")
        for r in report.rows:
            fh.write(f"{r.benchmark},{r.acquisition},{r.iteration},"
                     f"{r.median_abs_error!r},{r.q25_abs_error!r},"
                     f"{r.q75_abs_error!r},{r.n_replications}\n")
    if report.failures:
        with open(out_dir / "failures.csv", "w", encoding="utf-8") as fh:
            fh.write("benchmark,acquisition,replication,message\n")
            for bench, acq, rep, msg in report.failures:
                fh.write(f"{bench},{acq},{rep},{json.dumps(msg)}\n")
        print(f"{len(report.failures)} campaign(s) failed; see "
              f"{out_dir / 'failures.csv'}", file=sys.stderr)
    print(f"wrote {len(report.rows)} rows to {path}")
    return 0


def cmd_oracle_qoi(args) -> int:
    spec_kwargs = {}
    benchmark = None
    if args.config:
        setup = load_config(args.config, env=None)
        if setup.benchmark is not None:
            benchmark = setup.benchmark
        if setup.campaign is not None:
            spec_kwargs = {"kind": setup.campaign.qoi.kind,
                           "alpha": setup.campaign.qoi.alpha}
    if args.benchmark:
        benchmark = get_benchmark(args.benchmark)
    if benchmark is None:
        raise CliError("name a benchmark with --benchmark or via the config")
    if args.kind:
        spec_kwargs["kind"] = args.kind
    if args.alpha is not None:
        spec_kwargs["alpha"] = args.alpha
    spec = QoiSpec(**spec_kwargs)
    value = oracle_qoi(benchmark, spec, n_oracle=args.n_oracle)
    print(repr(value))
    return 0


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bode",
        description="Sequential Bayesian optimal design of experiments "
                    "targeting quantities of interest.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", required=True,
                       help="campaign configuration file (YAML)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the campaign seed")
        p.add_argument("--desk-scale", action="store_true",
                       help="use the reduced sampler/expansion presets")

    p = sub.add_parser("run", help="run a campaign to its budget")
    add_config_flags(p)
    p.add_argument("--out", required=True, help="state directory")
    p.add_argument("--resume", action="store_true",
                   help="continue if the state directory already exists")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("resume", help="continue an interrupted campaign")
    p.add_argument("--out", required=True, help="state directory")
    p.set_defaults(handler=cmd_resume)

    p = sub.add_parser("suggest",
                       help="print the next design without running it")
    p.add_argument("--out", required=True, help="state directory")
    p.set_defaults(handler=cmd_suggest)

    p = sub.add_parser("record", help="append an offline observation")
    p.add_argument("--out", required=True, help="state directory")
    p.add_argument("--x", required=True,
                   help="design as comma-separated decimals")
    p.add_argument("--y", required=True, help="observed value")
    p.set_defaults(handler=cmd_record)

    p = sub.add_parser("compare",
                       help="run the acquisition comparison study")
    add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("oracle-qoi",
                       help="print a benchmark's ground-truth QoI")
    p.add_argument("--config", default=None)
    p.add_argument("--benchmark", default=None)
    p.add_argument("--kind", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n-oracle", type=int, default=1_000_000)
    p.set_defaults(handler=cmd_oracle_qoi)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
