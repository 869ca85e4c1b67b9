"""Cumulative regret, violation and reward curves.

Inputs are per-round realised totals over the selected arms: ``sum_a[t-1]``
is the first-level reward collected at round t and ``sum_g[t-1]`` the
compound reward. Two violation curves are produced and kept apart:

* ``vio_horizon``: ``max(h*t - sum of a up to t, 0)``, the quantity the
  regret/violation bound talks about;
* ``vio_clipped``: ``sum over rounds of max(h - a collected that round, 0)``,
  the quantity the experiment figures plot.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

UNDEFINED_RATIO = float("inf")
COLUMNS = ("t", "cum_reward", "cum_regret", "vio_horizon", "vio_clipped", "ratio")


def _at(curve: np.ndarray, t):
    if t is None:
        return curve
    if t == 0:
        return 0.0
    return float(curve[t - 1])


def cumulative_reward(sum_g, t: int | None = None):
    return _at(np.cumsum(np.asarray(sum_g, dtype=float)), t)


def cumulative_regret(sum_g, optimal_value: float, t: int | None = None):
    """``t * optimal_value`` minus realised compound reward up to t."""
    sum_g = np.asarray(sum_g, dtype=float)
    rounds = np.arange(1, sum_g.size + 1)
    return _at(rounds * optimal_value - np.cumsum(sum_g), t)


def cumulative_violation(sum_a, h: float, t: int | None = None):
    """Return ``(vio_horizon, vio_clipped)``, as curves or as values at round t."""
    sum_a = np.asarray(sum_a, dtype=float)
    rounds = np.arange(1, sum_a.size + 1)
    horizon = np.maximum(h * rounds - np.cumsum(sum_a), 0.0)
    clipped = np.cumsum(np.maximum(h - sum_a, 0.0))
    return _at(horizon, t), _at(clipped, t)


def reward_violation_ratio(cum_reward, cum_violation):
    """Reward per unit of (clipped) violation; ``inf`` marks zero violation."""
    r = np.asarray(cum_reward, dtype=float)
    v = np.asarray(cum_violation, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > 0.0, r / np.where(v > 0.0, v, 1.0), UNDEFINED_RATIO)
    return float(out) if out.ndim == 0 else out


@dataclass
class MetricsTrace:
    t: np.ndarray
    cum_reward: np.ndarray
    cum_regret: np.ndarray
    vio_horizon: np.ndarray
    vio_clipped: np.ndarray
    ratio: np.ndarray

    @classmethod
    def from_run(cls, sum_a, sum_g, optimal_value: float, h: float) -> "MetricsTrace":
        reward = cumulative_reward(sum_g)
        horizon, clipped = cumulative_violation(sum_a, h)
        return cls(
            t=np.arange(1, reward.size + 1),
            cum_reward=reward,
            cum_regret=cumulative_regret(sum_g, optimal_value),
            vio_horizon=horizon,
            vio_clipped=clipped,
            ratio=reward_violation_ratio(reward, clipped),
        )

    def __len__(self):
        return self.t.size

    def thin(self, stride: int) -> "MetricsTrace":
        """Keep rounds that are multiples of ``stride``, plus the last round."""
        keep = (self.t % stride) == 0
        if self.t.size:
            keep[-1] = True
        return MetricsTrace(**{f.name: getattr(self, f.name)[keep] for f in fields(self)})

    def final(self) -> dict:
        return {name: float(getattr(self, name)[-1]) for name in COLUMNS[1:]}


class TraceAverager:
    """Running mean of per-run traces, folded in the order runs are added.

    Cumulative reward, regret and clipped violation are averaged per round;
    the horizon violation is the per-round mean of each run's clipped-at-zero
    value; the ratio is recomputed from the averaged reward and clipped
    violation.
    """

    _summed = ("cum_reward", "cum_regret", "vio_horizon", "vio_clipped")

    def __init__(self):
        self.runs = 0
        self._sums: dict[str, np.ndarray] = {}
        self._t = None

    def add(self, trace: MetricsTrace) -> None:
        if self._t is None:
            self._t = trace.t.copy()
            self._sums = {k: np.zeros(len(trace)) for k in self._summed}
        for k in self._summed:
            self._sums[k] += getattr(trace, k)
        self.runs += 1

    def mean(self) -> MetricsTrace:
        if not self.runs:
            raise ValueError("no runs added")
        avg = {k: v / self.runs for k, v in self._sums.items()}
        return MetricsTrace(t=self._t.copy(), ratio=reward_violation_ratio(avg["cum_reward"], avg["vio_clipped"]), **avg)


def average_traces(traces) -> MetricsTrace:
    acc = TraceAverager()
    for tr in traces:
        acc.add(tr)
    return acc.mean()
