"""
The per-round LP and dependent rounding
=======================================

Each round Con-UCB solves a small LP over fractional selections and then
turns the fractional vector into an actual set of L arms.
"""

# %%
# A four-arm instance
# -------------------
#
# Arm 0 is attractive but rarely converts; arm 2 is the best compromise.

import numpy as np

from conucb import dependent_rounding, solve_constrained_selection

a = np.array([0.9, 0.2, 0.8, 0.3])
g = np.array([0.1, 0.6, 0.5, 0.4])
L, h = 2, 1.5

res = solve_constrained_selection(g, a, L, h)
print("x =", res.x, "objective =", res.objective, "x.a =", res.x @ a)

# %%
# Lowering h relaxes the constraint; at h = 0 the answer is the top-L by g.

for hh in (1.7, 1.5, 1.2, 0.0):
    r = solve_constrained_selection(g, a, L, hh)
    print(f"h={hh:.1f}  x={np.round(r.x, 3)}  obj={r.objective:.3f}")

# %%
# Rounding keeps the marginals
# ----------------------------

rng = np.random.default_rng(0)
counts = np.zeros(4)
for _ in range(20_000):
    for i in dependent_rounding(res.x, rng, L):
        counts[i] += 1
print("empirical:", counts / 20_000)
print("target:   ", res.x)
