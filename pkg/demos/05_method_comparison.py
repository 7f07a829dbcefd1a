"""
Comparing acquisition strategies on a benchmark
===============================================

The comparison harness runs full campaigns for every combination of
benchmark, acquisition rule, and replication seed, measures each
iteration's QoI estimate against a brute-force ground truth, and
summarizes the absolute error per iteration across replications.

Here the information-gain rule is raced against plain uncertainty
sampling on the two-bump density with one replication each - enough to
see the shape of the output; the test suite runs the three-replication
version with larger sampler budgets.
"""

import numpy as np

from bode import (
    BgoConfig,
    CampaignConfig,
    EkldConfig,
    HmcConfig,
    QoiSpec,
    compare,
    get_benchmark,
)

bench = get_benchmark("gaussian-mixture")

# 1. One reduced template; the harness swaps in the acquisition rule and
#    a derived seed per cell.
template = CampaignConfig(
    space=bench.domain,
    n_initial=5,
    n_max=12,
    qoi=QoiSpec(kind="expectation", n_inner=1000),
    hmc=HmcConfig(n_samples=400, burn_in=150, thin_to=10),
    ekld=EkldConfig(m_posterior=8, b_hypothetical=8, s_paths=16),
    bgo=BgoConfig(n_init=6, n_total=14, n_candidates=128),
    kle_n_quad=100,
    seed=0,
)

report = compare(["gaussian-mixture"], ["ekld", "us"], replications=1,
                 cfg=template)

# 2. The ground truth behind the error columns is computed once per
#    benchmark by brute force.
print(f"ground-truth QoI: {report.references['gaussian-mixture']:.4f}")
print(f"campaign failures: {len(report.failures)}")

# 3. Median absolute error per iteration, one column per acquisition.
print("\niter    ekld      us")
for it in range(1, report.n_iterations + 1):
    cells = {acq: next(r for r in report.rows_for("gaussian-mixture", acq)
                       if r.iteration == it)
             for acq in ("ekld", "us")}
    print(f"  {it:2d}  {cells['ekld'].median_abs_error:7.4f} "
          f"{cells['us'].median_abs_error:7.4f}")

for acq in ("ekld", "us"):
    final = report.final_errors("gaussian-mixture", acq)
    print(f"\nfinal |error| ({acq}): "
          + ", ".join(f"{e:.4f}" for e in final))
