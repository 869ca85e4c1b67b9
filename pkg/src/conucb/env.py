"""Bernoulli two-level reward environment and arm-table I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from . import _kernels
from .core import ArmParams, RewardSample, RoundOutcome, as_selection

HEADER = ("arm_id", "a_mean", "b_mean")
GENERATORS = ("uniform", "conflicting")


class ArmTableError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ArmTable:
    arm_ids: tuple[str, ...]
    arms: tuple[ArmParams, ...]

    def __post_init__(self):
        if len(self.arm_ids) != len(self.arms):
            raise ArmTableError("arm_ids and arms differ in length")
        if len(set(self.arm_ids)) != len(self.arm_ids):
            raise ArmTableError("duplicate arm_id")

    def __len__(self):
        return len(self.arms)

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

    @classmethod
    def from_means(cls, a_mean, b_mean, arm_ids=None) -> "ArmTable":
        a_mean = list(a_mean)
        if arm_ids is None:
            width = len(str(max(len(a_mean) - 1, 0)))
            arm_ids = [f"arm{k:0{width}d}" for k in range(len(a_mean))]
        return cls(tuple(arm_ids), tuple(ArmParams(float(a), float(b)) for a, b in zip(a_mean, b_mean)))


def load_arm_table(path: Union[str, Path]) -> ArmTable:
    """Read ``arm_id,a_mean,b_mean`` CSV; row order gives arm index order."""
    ids: list[str] = []
    arms: list[ArmParams] = []
    seen: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(c.strip() for c in header) != HEADER:
            raise ArmTableError(f"header must be {','.join(HEADER)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ArmTableError(f"expected 3 fields, got {len(row)}", line)
            arm_id = row[0].strip()
            if not arm_id:
                raise ArmTableError("empty arm_id", line)
            try:
                a, b = float(row[1]), float(row[2])
            except ValueError:
                raise ArmTableError(f"non-numeric mean in {row!r}", line) from None
            for name, v in (("a_mean", a), ("b_mean", b)):
                if not (0.0 <= v <= 1.0):
                    raise ArmTableError(f"{name}={v!r} outside [0, 1]", line)
            if arm_id in seen:
                raise ArmTableError(f"duplicate arm_id {arm_id!r} (first on line {seen[arm_id]})", line)
            seen[arm_id] = line
            ids.append(arm_id)
            arms.append(ArmParams(a, b))
    if not arms:
        raise ArmTableError("table has no arms")
    return ArmTable(tuple(ids), tuple(arms))


def write_arm_table(table: ArmTable, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for arm_id, arm in zip(table.arm_ids, table.arms):
            w.writerow([arm_id, repr(arm.a_mean), repr(arm.b_mean)])


def synthetic_instance(kind: str, K: int, seed: int) -> ArmTable:
    """Deterministic synthetic arm table.

    ``uniform``: a, b ~ U[0, 1] independently.
    ``conflicting``: a ~ U[0, 1], b = clip(1 - a + N(0, 0.1^2)), so attractive
    arms tend to convert poorly.
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        a = rng.random(K)
        b = rng.random(K)
    elif kind == "conflicting":
        a = rng.random(K)
        b = np.clip(1.0 - a + rng.normal(0.0, 0.1, K), 0.0, 1.0)
    else:
        raise ValueError(f"unknown generator {kind!r}; choose from {', '.join(GENERATORS)}")
    return ArmTable.from_means(a, b)


def run_key(base_seed: int, run: int) -> int:
    """64-bit reward-stream key for run ``run`` of an experiment."""
    ss = np.random.SeedSequence([int(base_seed), int(run)])
    return int(ss.generate_state(1, np.uint64)[0])


class RewardStream:
    """Counter-addressed Bernoulli source.

    The uniform behind arm ``i``'s level-``l`` reward at round ``t`` is a
    fixed function of ``(key, t, i, l)``, so any policy that plays arm ``i`` at
    round ``t`` sees the same realisation, whatever else it selected.
    """

    def __init__(self, key: int):
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF

    @classmethod
    def for_run(cls, base_seed: int, run: int) -> "RewardStream":
        return cls(run_key(base_seed, run))

    def uniform(self, t: int, arm: int, level: int) -> float:
        return float(_kernels.counter_uniform(np.uint64(self.key), t, arm, level))

    def draw(self, t: int, arm: int, a_mean: float, b_mean: float) -> tuple[float, float]:
        return _kernels.draw_pair(np.uint64(self.key), t, arm, a_mean, b_mean)


def sample_round(table: ArmTable, selection, rng: Union[RewardStream, np.random.Generator], t: int = 1) -> RoundOutcome:
    """Draw independent Bernoulli first/second-level rewards for the selected arms only."""
    sel = as_selection(selection, table.K, len(tuple(selection)))
    samples = {}
    for i in sel:
        arm = table.arms[i]
        if isinstance(rng, RewardStream):
            a, b = rng.draw(t, i, arm.a_mean, arm.b_mean)
        else:
            u = rng.random(2)
            a = 1.0 if u[0] < arm.a_mean else 0.0
            b = 1.0 if u[1] < arm.b_mean else 0.0
        samples[i] = RewardSample(float(a), float(b))
    return RoundOutcome(t, sel, samples)
