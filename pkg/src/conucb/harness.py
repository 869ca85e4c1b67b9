"""Experiment runner: R seeded runs per policy, averaged traces and a summary file."""

from __future__ import annotations

import configparser
import csv
import io
import logging
import zlib
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ConfigError, InfeasibleInstanceError, ProblemInstance
from .env import GENERATORS, ArmTable, load_arm_table, run_key, synthetic_instance
from .metrics import COLUMNS, MetricsTrace, TraceAverager
from .policies import POLICY_NAMES, confidence_gamma, exp3m_gamma, oracle_policy, run_policy

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    L: int
    h: float
    T: int
    delta: float
    out: str
    arms: Optional[str] = None
    synthetic: Optional[str] = None
    K: Optional[int] = None
    instance_seed: Optional[int] = None
    policies: tuple[str, ...] = POLICY_NAMES
    runs: int = 200
    seed: int = 0
    stride: int = 50

    def __post_init__(self):
        self.policies = tuple(self.policies)
        if (self.arms is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of an arm table file or a synthetic generator")
        if self.synthetic is not None:
            if self.synthetic not in GENERATORS:
                raise ConfigError(f"unknown generator {self.synthetic!r}; choose from {', '.join(GENERATORS)}")
            if self.K is None or self.K < 2:
                raise ConfigError("a synthetic instance needs K >= 2")
        if not self.policies:
            raise ConfigError("no policies given")
        unknown = [p for p in self.policies if p not in POLICY_NAMES]
        if unknown:
            raise ConfigError(f"unknown policy {unknown[0]!r}; choose from {', '.join(POLICY_NAMES)}")
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("policy listed twice")
        if self.runs < 1:
            raise ConfigError(f"need runs >= 1, got {self.runs}")
        if self.stride < 1:
            raise ConfigError(f"need stride >= 1, got {self.stride}")

    def load_table(self) -> ArmTable:
        if self.arms is not None:
            return load_arm_table(self.arms)
        seed = self.seed if self.instance_seed is None else self.instance_seed
        return synthetic_instance(self.synthetic, int(self.K), int(seed))

    def instance(self, table: ArmTable) -> ProblemInstance:
        return ProblemInstance(table.arms, int(self.L), float(self.h), int(self.T), float(self.delta))


def policy_rng(base_seed: int, run: int, name: str) -> np.random.Generator:
    """Rounding/exploration randomness of one policy in one run.

    Keyed by the policy name so a policy's draws do not depend on which
    other policies share the experiment.
    """
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(run), zlib.crc32(name.encode())]))


def compute_oracle_line(instance: ProblemInstance, T: int | None = None) -> np.ndarray:
    """Cumulative reward of the optimal policy, t * x*.g for t = 1..T."""
    T = instance.T if T is None else int(T)
    x_star = oracle_policy(instance)
    return np.arange(1, T + 1) * float(x_star @ instance.g)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def write_trace(trace: MetricsTrace, path: Path) -> None:
    cols = [getattr(trace, name) for name in COLUMNS]
    _write_csv(path, COLUMNS, zip(*cols))


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every configured policy ``config.runs`` times and write traces plus ``summary.txt``.

    Run ``r`` draws rewards from the stream keyed by ``(seed, r)``, shared by
    all policies, and policy randomness from ``(seed, r, policy name)``.
    Runs are folded into the average in run order.
    """
    table = config.load_table()
    instance = config.instance(table)
    x_star = oracle_policy(instance)
    opt = float(x_star @ instance.g)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    keep = np.arange(1, instance.T + 1)
    keep = keep[(keep % config.stride == 0) | (keep == instance.T)]
    _write_csv(out / "optimal_reward.csv", ("t", "optimal_reward"), zip(keep, keep * opt))

    results = {}
    for name in config.policies:
        acc = TraceAverager()
        for r in range(config.runs):
            res = run_policy(name, instance, run_key(config.seed, r), policy_rng(config.seed, r, name), x_star=x_star)
            acc.add(MetricsTrace.from_run(res.sum_a, res.sum_g, opt, instance.h))
            if (r + 1) % 10 == 0 or r + 1 == config.runs:
                log.info("%s: %d/%d runs", name, r + 1, config.runs)
        mean = acc.mean()
        write_trace(mean.thin(config.stride), out / f"{name}_trace.csv")
        results[name] = mean.final()

    summary = {
        "experiment": {
            **{k: v for k, v in asdict(config).items() if v is not None and k != "out"},
            "K": instance.K,
            "base_seed": config.seed,
            "gamma": confidence_gamma(instance.K, instance.T, instance.delta),
            "exp3m_gamma": exp3m_gamma(instance.K, instance.L, instance.T),
            "optimal_value": opt,
            "top_l_attractiveness": float(np.sort(instance.a)[-instance.L :].sum()),
        },
        "policies": results,
    }
    write_summary(summary, out / "summary.txt")
    return summary


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def write_summary(summary: dict, path: Path) -> None:
    cp = _parser()
    exp = {}
    for k, v in summary["experiment"].items():
        if isinstance(v, (tuple, list)):
            exp[k] = ",".join(map(str, v))
        elif isinstance(v, float):
            exp[k] = repr(v)
        else:
            exp[k] = str(v)
    cp["experiment"] = exp
    for name, final in summary["policies"].items():
        cp[f"policy:{name}"] = {k: repr(float(v)) for k, v in final.items()}
    buf = io.StringIO()
    cp.write(buf)
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_summary(path) -> dict:
    cp = _parser()
    cp.read(path, encoding="utf-8")
    policies = {
        sec.split(":", 1)[1]: {k: float(v) for k, v in cp[sec].items()} for sec in cp.sections() if sec.startswith("policy:")
    }
    return {"experiment": dict(cp["experiment"]), "policies": policies}


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "InfeasibleInstanceError",
    "compute_oracle_line",
    "policy_rng",
    "read_summary",
    "run_experiment",
    "write_summary",
    "write_trace",
]
