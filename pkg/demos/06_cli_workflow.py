"""
Driving campaigns from the command line
=======================================

The `bode` entry point wraps the library for lab use: a YAML file
declares the campaign, a state directory accumulates the manifest,
dataset, and per-iteration trace as plain CSV, and every subcommand is
safe to interrupt and resume.  A physical experiment is supported by the
suggest/record pair: the tool prints the next design, the operator runs
it offline and records the measured outcome, and the suggestion after
that reflects the new data.

This script drives the same entry point in-process so its output can be
shown here; on a shell the calls read, e.g.,

    bode run --config campaign.yaml --out state/
    bode suggest --out state/
    bode record --out state/ --x 0.41 --y 1.73
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from bode import benchmark_fn, cli

CONFIG = """\
benchmark: gaussian-mixture
campaign:
  n_initial: 4
  n_max: 6
  acquisition: us
  seed: 11
qoi:
  kind: expectation
  n_inner: 500
hmc:
  n_samples: 150
  burn_in: 50
  thin_to: 8
ekld:
  m_posterior: 6
  b_hypothetical: 4
  s_paths: 8
bgo:
  n_init: 4
  n_total: 8
  n_candidates: 64
kle:
  n_quad: 60
"""

root = Path(tempfile.mkdtemp(prefix="bode-demo-"))
config = root / "campaign.yaml"
config.write_text(CONFIG)
state = root / "state"

# 1. Run a self-driving campaign against the built-in benchmark oracle.
code = cli.main(["run", "--config", str(config), "--out", str(state)])
manifest = json.loads((state / "manifest.json").read_text())
print(f"run exited {code}; status={manifest['status']!r}, "
      f"seed={manifest['seed']}")

# 2. The trace records one line per selected experiment.
lines = (state / "trace.csv").read_text().splitlines()
print("\ntrace.csv:")
for line in lines:
    print("  " + line)

# 3. Ask for the next design; nothing is mutated by asking.
print("\nsuggest ->", end=" ")
cli.main(["suggest", "--out", str(state)])

# 4. Record an offline measurement at a design of our choosing, then ask
#    again - the suggestion moves in response to the new evidence.
x = 0.41
y = benchmark_fn("gaussian-mixture", np.array([[x]]))[0]
cli.main(["record", "--out", str(state), "--x", f"{x}", "--y", f"{y}"])
print("suggest ->", end=" ")
cli.main(["suggest", "--out", str(state)])

# 5. Ground-truth QoI values are available for any benchmark.
print("\noracle-qoi ->", end=" ")
cli.main(["oracle-qoi", "--benchmark", "gaussian-mixture",
          "--kind", "expectation"])
