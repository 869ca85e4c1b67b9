"""
How the confidence scale shapes Con-UCB
=======================================

The default confidence scale gamma = 72 ln(8KT/delta) is large: with K=20,
T=20,000 and delta=0.05 it is about 1300, so the indices stay near 1 for a
long time and the LP constraint is nearly always looks satisfiable. This
script compares it with smaller scales on the same reward streams.
"""

# %%

import numpy as np

from conucb import ProblemInstance, oracle_policy, run_policy, synthetic_instance
from conucb.env import run_key
from conucb.harness import policy_rng
from conucb.metrics import MetricsTrace, average_traces
from conucb.policies import confidence_gamma

T = 20_000
table = synthetic_instance("conflicting", 20, 0)
h = 0.8 * np.sort(table.a)[-5:].sum()
inst = ProblemInstance(table.arms, 5, h, T, 0.05)
x_star = oracle_policy(inst)
opt = x_star @ inst.g
print(f"default gamma = {confidence_gamma(20, T, 0.05):.0f}, optimum per round = {opt:.3f}")

# %%


def summarize(name, gamma=None, runs=10):
    traces = []
    for r in range(runs):
        res = run_policy(name, inst, run_key(0, r), policy_rng(0, r, name), x_star=x_star, gamma=gamma)
        traces.append(MetricsTrace.from_run(res.sum_a, res.sum_g, opt, h))
    return average_traces(traces).final()


rows = [("conucb", None), ("conucb", 50.0), ("conucb", 5.0), ("conucb", 1.0), ("cucb", None), ("oracle", None)]
for name, gamma in rows:
    f = summarize(name, gamma)
    label = name if gamma is None else f"{name} gamma={gamma:g}"
    print(f"{label:20s} regret={f['cum_regret']:8.1f} vio_horizon={f['vio_horizon']:8.1f} ratio={f['ratio']:.3f}")
