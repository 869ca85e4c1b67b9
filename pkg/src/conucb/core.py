"""Domain types for the constrained two-level bandit."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

SUM_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid problem or experiment parameters."""


class InfeasibleInstanceError(ValueError):
    """No policy in the simplex-box can meet the attractiveness threshold."""


def _check_prob(name: str, v: float) -> None:
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class ArmParams:
    """True means of one arm: click-through (first level) and after-click (second level)."""

    a_mean: float
    b_mean: float

    def __post_init__(self):
        _check_prob("a_mean", self.a_mean)
        _check_prob("b_mean", self.b_mean)

    @property
    def g_mean(self) -> float:
        return self.a_mean * self.b_mean


@dataclass(frozen=True)
class ProblemInstance:
    arms: tuple[ArmParams, ...]
    L: int
    h: float
    T: int
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        K = len(self.arms)
        if not (1 <= self.L <= K):
            raise ConfigError(f"need 1 <= L <= K, got L={self.L}, K={K}")
        if not (0.0 < self.h < self.L):
            raise ConfigError(f"need 0 < h < L, got h={self.h}, L={self.L}")
        if self.T < 1:
            raise ConfigError(f"need T >= 1, got {self.T}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"need 0 < delta < 1, got {self.delta}")

    @classmethod
    def from_means(cls, a_mean, b_mean, L, h, T, delta) -> "ProblemInstance":
        arms = tuple(ArmParams(float(a), float(b)) for a, b in zip(a_mean, b_mean))
        return cls(arms, int(L), float(h), int(T), float(delta))

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def a(self) -> np.ndarray:
        return np.array([arm.a_mean for arm in self.arms])

    @property
    def b(self) -> np.ndarray:
        return np.array([arm.b_mean for arm in self.arms])

    @property
    def g(self) -> np.ndarray:
        return self.a * self.b


def as_policy_vector(x, L: int | None = None, tol: float = SUM_TOL) -> np.ndarray:
    """Validate a probabilistic selection vector and return it as a float array.

    ``L`` defaults to the nearest integer to ``sum(x)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("policy vector must be a non-empty 1-d array")
    if np.any(x < -tol) or np.any(x > 1.0 + tol) or not np.all(np.isfinite(x)):
        raise ValueError("policy vector entries must lie in [0, 1]")
    total = float(x.sum())
    if L is None:
        L = int(round(total))
    if abs(total - L) > tol:
        raise ValueError(f"policy vector sums to {total!r}, expected {L}")
    return np.clip(x, 0.0, 1.0)


def as_selection(indices, K: int, L: int) -> tuple[int, ...]:
    """Validate a selection set: exactly L distinct indices in [0, K)."""
    sel = tuple(sorted(int(i) for i in indices))
    if len(sel) != L or len(set(sel)) != L:
        raise ValueError(f"selection must contain exactly {L} distinct arms, got {sel}")
    if sel and (sel[0] < 0 or sel[-1] >= K):
        raise ValueError(f"selection indices out of range for K={K}: {sel}")
    return sel


def compound(sample_a: float, sample_b: float) -> float:
    return sample_a * sample_b


@dataclass(frozen=True)
class RewardSample:
    a: float
    b: float
    g: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g", compound(self.a, self.b))


@dataclass(frozen=True)
class RoundOutcome:
    round: int
    selection: tuple[int, ...]
    samples: Mapping[int, RewardSample]

    def __post_init__(self):
        if set(self.samples) != set(self.selection):
            raise ValueError("outcome samples must cover exactly the selected arms")

    @property
    def sum_a(self) -> float:
        return sum(self.samples[i].a for i in self.selection)

    @property
    def sum_g(self) -> float:
        return sum(self.samples[i].g for i in self.selection)


@dataclass(frozen=True)
class ArmStatistics:
    """Running per-arm state.

    Sums are stored and the averages derived on demand. The averages divide by
    ``n + 1`` rather than ``n``, so an unplayed arm reads zero and every
    average is strictly below one.
    """

    n: int = 0
    a_sum: float = 0.0
    g_sum: float = 0.0

    @property
    def a_bar(self) -> float:
        return self.a_sum / (self.n + 1)

    @property
    def g_bar(self) -> float:
        return self.g_sum / (self.n + 1)


def update_statistics(stats: ArmStatistics, sample: RewardSample) -> ArmStatistics:
    return ArmStatistics(stats.n + 1, stats.a_sum + sample.a, stats.g_sum + sample.g)


def incremental_update(n: int, a_bar: float, g_bar: float, sample: RewardSample) -> tuple[int, float, float]:
    """The averaged form of the update, kept for cross-checking the sum form."""
    n_new = n + 1
    return (
        n_new,
        (a_bar * (n + 1) + sample.a) / (n_new + 1),
        (g_bar * (n + 1) + sample.g) / (n_new + 1),
    )


def statistics_from_arrays(n: Sequence[float], a_sum: Sequence[float], g_sum: Sequence[float]) -> list[ArmStatistics]:
    return [ArmStatistics(int(k), float(sa), float(sg)) for k, sa, sg in zip(n, a_sum, g_sum)]
