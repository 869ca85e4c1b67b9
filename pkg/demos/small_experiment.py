"""
A small constrained experiment
==============================

Runs all five policies on a synthetic instance where attractiveness and
conversion pull in opposite directions, then prints the final metrics.
"""

# %%

import tempfile
from pathlib import Path

import numpy as np

from conucb import ExperimentConfig, run_experiment, synthetic_instance

table = synthetic_instance("conflicting", 20, 0)
h = 0.8 * np.sort(table.a)[-5:].sum()
print(f"K={table.K}, corr(a, b)={np.corrcoef(table.a, table.b)[0, 1]:.2f}, h={h:.3f}")

# %%
# 20 runs of 10,000 rounds each; traces land in a temporary directory.

out = Path(tempfile.mkdtemp())
cfg = ExperimentConfig(L=5, h=h, T=10_000, delta=0.05, out=str(out), synthetic="conflicting", K=20,
                       instance_seed=0, runs=20, seed=0)
summary = run_experiment(cfg)

print(f"{'policy':8s} {'reward':>9s} {'regret':>9s} {'vio_clip':>9s} {'ratio':>7s}")
for name, fin in summary["policies"].items():
    print(f"{name:8s} {fin['cum_reward']:9.1f} {fin['cum_regret']:9.1f} {fin['vio_clipped']:9.1f} {fin['ratio']:7.3f}")

# %%
# The trace files are plain CSV, ready for any plotting tool.

print(sorted(p.name for p in out.iterdir()))
print((out / "conucb_trace.csv").read_text().splitlines()[:3])
