"""Con-UCB and the baseline policies.

All policies share one contract: ``select(rng)`` returns the probabilistic
selection vector for the current round together with the L arms actually
played, and ``update(outcome)`` absorbs the observed rewards and advances the
round counter. :func:`run_policy` executes the same logic as a compiled loop
for long simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import ArmStatistics, InfeasibleInstanceError, ProblemInstance, RoundOutcome, statistics_from_arrays
from .lp import fallback_vector, solve_constrained_selection
from .rounding import dependent_rounding

POLICY_NAMES = ("conucb", "cucb", "exp3m", "oracle", "uniform")


def confidence_gamma(K: int, T: int, delta: float) -> float:
    return 72.0 * math.log(8.0 * K * T / delta)


@dataclass(frozen=True)
class ConfidenceParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    @classmethod
    def from_instance(cls, instance: ProblemInstance) -> "ConfidenceParams":
        return cls(confidence_gamma(instance.K, instance.T, instance.delta))


def radius(mu: float, n: float, gamma: float) -> float:
    """Confidence radius sqrt(gamma*mu/n) + gamma/n."""
    return float(_kernels.radius(float(mu), float(n), float(gamma)))


def ucb_indices(stats: list[ArmStatistics], gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Optimistic indices (a_hat, g_hat), each clipped at 1."""
    n = np.array([s.n for s in stats], dtype=float)
    sa = np.array([s.a_sum for s in stats], dtype=float)
    sg = np.array([s.g_sum for s in stats], dtype=float)
    a_hat = np.empty_like(n)
    g_hat = np.empty_like(n)
    _kernels.ucb_from_sums(n, sa, gamma, a_hat)
    _kernels.ucb_from_sums(n, sg, gamma, g_hat)
    return a_hat, g_hat


def exp3m_gamma(K: int, L: int, T: int) -> float:
    """Exploration rate tuned for a known horizon (Uchiya et al., Corollary 1)."""
    if L >= K:
        return 0.0
    return min(1.0, math.sqrt(K * math.log(K / L) / ((math.e - 1.0) * L * T)))


def oracle_policy(instance: ProblemInstance) -> np.ndarray:
    """Best stationary randomized policy computed from the true means."""
    res = solve_constrained_selection(instance.g, instance.a, instance.L, instance.h)
    if not res.optimal:
        raise InfeasibleInstanceError(
            f"top-{instance.L} attractiveness {float(np.sort(instance.a)[-instance.L:].sum()):.6g} "
            f"is below h={instance.h}"
        )
    return res.x


class _Policy:
    name = ""

    def __init__(self, K: int, L: int):
        self.K = int(K)
        self.L = int(L)
        self.t = 1
        self._pending: Optional[tuple[int, ...]] = None

    def _expect(self, outcome: RoundOutcome) -> None:
        if self._pending is None or tuple(outcome.selection) != self._pending:
            raise ValueError(f"outcome for {outcome.selection} does not match the pending selection {self._pending}")
        self._pending = None

    def _play(self, x, rng):
        sel = dependent_rounding(x, rng, self.L)
        self._pending = sel
        return x, sel

    def update(self, outcome: RoundOutcome) -> None:
        self._expect(outcome)
        self.t += 1


class _CountingPolicy(_Policy):
    def __init__(self, K, L):
        super().__init__(K, L)
        self.n = np.zeros(self.K)
        self.a_sum = np.zeros(self.K)
        self.g_sum = np.zeros(self.K)

    @property
    def statistics(self) -> list[ArmStatistics]:
        return statistics_from_arrays(self.n, self.a_sum, self.g_sum)

    def update(self, outcome: RoundOutcome) -> None:
        self._expect(outcome)
        for i in outcome.selection:
            s = outcome.samples[i]
            self.n[i] += 1.0
            self.a_sum[i] += s.a
            self.g_sum[i] += s.g
        self.t += 1


class ConUCB(_CountingPolicy):
    """Per round: UCB indices, the constrained LP on them, then dependent rounding."""

    name = "conucb"

    def __init__(self, K: int, L: int, h: float, T: int, delta: float, gamma: float | None = None):
        super().__init__(K, L)
        self.h = float(h)
        self.gamma = confidence_gamma(K, T, delta) if gamma is None else float(gamma)
        ConfidenceParams(self.gamma)

    @classmethod
    def from_instance(cls, instance: ProblemInstance) -> "ConUCB":
        return cls(instance.K, instance.L, instance.h, instance.T, instance.delta)

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        a_hat = np.empty(self.K)
        g_hat = np.empty(self.K)
        _kernels.ucb_from_sums(self.n, self.a_sum, self.gamma, a_hat)
        _kernels.ucb_from_sums(self.n, self.g_sum, self.gamma, g_hat)
        return a_hat, g_hat

    def policy_vector(self) -> np.ndarray:
        a_hat, g_hat = self.indices()
        res = solve_constrained_selection(g_hat, a_hat, self.L, self.h)
        return res.x if res.optimal else fallback_vector(a_hat, self.L)

    def select(self, rng: np.random.Generator):
        return self._play(self.policy_vector(), rng)


class CUCB(_CountingPolicy):
    """Top-L arms by g_bar + sqrt(3 ln t / (2N)); unplayed arms first."""

    name = "cucb"

    def indices(self) -> np.ndarray:
        out = np.empty(self.K)
        _kernels.cucb_index(self.n, self.g_sum, float(self.t), out)
        return out

    def select(self, rng: np.random.Generator | None = None):
        order = np.argsort(-self.indices(), kind="mergesort")
        sel = tuple(sorted(int(i) for i in order[: self.L]))
        x = np.zeros(self.K)
        x[list(sel)] = 1.0
        self._pending = sel
        return x, sel


class Exp3M(_Policy):
    """Exponential weights over compound rewards with weight capping.

    Weights are kept as logarithms; ``weights`` rescales them so the largest
    equals one.
    """

    name = "exp3m"

    def __init__(self, K: int, L: int, T: int, gamma: float | None = None):
        super().__init__(K, L)
        self.gamma = exp3m_gamma(K, L, T) if gamma is None else float(gamma)
        self.log_w = np.zeros(self.K)
        self._p = np.empty(self.K)
        self._capped = np.zeros(self.K, dtype=bool)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_w - self.log_w.max())

    def probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.empty(self.K)
        capped = np.zeros(self.K, dtype=bool)
        _kernels.exp3m_probs(self.log_w, self.L, self.gamma, p, capped)
        return p, capped

    def select(self, rng: np.random.Generator):
        self._p, self._capped = self.probabilities()
        return self._play(self._p.copy(), rng)

    def update(self, outcome: RoundOutcome) -> None:
        self._expect(outcome)
        for i in outcome.selection:
            if not self._capped[i]:
                self.log_w[i] += self.L * self.gamma * outcome.samples[i].g / (self.K * self._p[i])
        self.t += 1


class OraclePolicy(_Policy):
    """Plays the true-mean optimum x* every round."""

    name = "oracle"

    def __init__(self, instance: ProblemInstance):
        super().__init__(instance.K, instance.L)
        self.x = oracle_policy(instance)

    def select(self, rng: np.random.Generator):
        return self._play(self.x.copy(), rng)


class UniformRandom(_Policy):
    """A uniformly random L-subset each round."""

    name = "uniform"

    def select(self, rng: np.random.Generator):
        out = np.empty(self.L, dtype=np.int64)
        _kernels.uniform_subset(self.K, self.L, rng, out, np.empty(self.K, dtype=np.int64))
        sel = tuple(sorted(int(i) for i in out))
        self._pending = sel
        return np.full(self.K, self.L / self.K), sel


def make_policy(name: str, instance: ProblemInstance) -> _Policy:
    if name == "conucb":
        return ConUCB.from_instance(instance)
    if name == "cucb":
        return CUCB(instance.K, instance.L)
    if name == "exp3m":
        return Exp3M(instance.K, instance.L, instance.T)
    if name == "oracle":
        return OraclePolicy(instance)
    if name == "uniform":
        return UniformRandom(instance.K, instance.L)
    raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")


@dataclass
class RunResult:
    """Per-round realised totals of one run: sum over selected arms of a and of g."""

    sum_a: np.ndarray
    sum_g: np.ndarray
    diagnostics: Optional[dict] = None


_DIAG_NAMES = {
    _kernels.D_PAIRS: "pairs",
    _kernels.D_CONC_A: "concentration_a",
    _kernels.D_CONC_G: "concentration_g",
    _kernels.D_OPT_A: "optimism_a",
    _kernels.D_OPT_G: "optimism_g",
    _kernels.D_ANY: "any_failure",
    _kernels.D_OPT_ROUNDS: "optimistic_rounds",
    _kernels.D_GAP_FAIL: "lp_below_optimum",
    _kernels.D_INFEASIBLE: "infeasible_rounds",
}


def run_policy(
    name: str,
    instance: ProblemInstance,
    key: int,
    rng: np.random.Generator,
    x_star: np.ndarray | None = None,
    track: bool = False,
    gamma: float | None = None,
) -> RunResult:
    """Simulate ``instance.T`` rounds of a policy in compiled code.

    Rewards come from the counter-addressed stream ``key`` (see
    :class:`conucb.env.RewardStream`); ``rng`` drives the policy's own
    randomisation. ``track`` collects coverage diagnostics for Con-UCB and
    ``gamma`` overrides its confidence scale (default 72 ln(8KT/delta)).
    """
    a = np.ascontiguousarray(instance.a)
    b = np.ascontiguousarray(instance.b)
    L, T = instance.L, instance.T
    sum_a = np.empty(T)
    sum_g = np.empty(T)
    k = np.uint64(int(key) & 0xFFFFFFFFFFFFFFFF)
    diag = None
    if name == "conucb":
        if x_star is None and track:
            x_star = oracle_policy(instance)
        xs = np.zeros(instance.K) if x_star is None else np.ascontiguousarray(x_star, dtype=float)
        opt = float(xs @ instance.g)
        d = np.zeros(_kernels.N_DIAG, dtype=np.int64)
        if gamma is None:
            gamma = confidence_gamma(instance.K, T, instance.delta)
        _kernels.run_conucb(a, b, L, instance.h, gamma, T, k, rng, sum_a, sum_g, track, xs, opt, d)
        if track:
            diag = {label: int(d[slot]) for slot, label in _DIAG_NAMES.items()}
    elif name == "cucb":
        _kernels.run_cucb(a, b, L, T, k, sum_a, sum_g)
    elif name == "exp3m":
        _kernels.run_exp3m(a, b, L, exp3m_gamma(instance.K, L, T), T, k, rng, sum_a, sum_g)
    elif name == "oracle":
        xs = oracle_policy(instance) if x_star is None else x_star
        _kernels.run_fixed(a, b, L, np.ascontiguousarray(xs, dtype=float), T, k, rng, sum_a, sum_g)
    elif name == "uniform":
        _kernels.run_uniform(a, b, L, T, k, rng, sum_a, sum_g)
    else:
        raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
    return RunResult(sum_a, sum_g, diag)


__all__ = [
    "POLICY_NAMES",
    "CUCB",
    "ConUCB",
    "ConfidenceParams",
    "Exp3M",
    "OraclePolicy",
    "RunResult",
    "UniformRandom",
    "confidence_gamma",
    "exp3m_gamma",
    "make_policy",
    "oracle_policy",
    "radius",
    "run_policy",
    "ucb_indices",
]
