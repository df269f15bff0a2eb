"""Multi-strategy, multi-seed experiment runner with mean/stddev aggregation.

The summary statistic convention is the population standard deviation
(divisor n), noted in every report header. Failed runs are recorded in the
report instead of being dropped.
"""

from __future__ import annotations

import json
import math
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from ..data.dataset import DatasetSplits
from ..errors import ConfigurationError
from ..laneclasses import LaneClassMapping
from ..uda.train import RunResult, StrategyConfig, normalize_strategy, train

STDDEV_CONVENTION = "population (divisor n)"


@dataclass
class ExperimentSpec:
    strategies: list[str]
    seeds: tuple[int, ...] = (0, 1, 2)
    sim_root: str | Path | None = None
    real_root: str | Path | None = None
    out_dir: Path = Path("runs")
    ablation_multipliers: tuple[int, ...] = (1, 2, 3, 4, 5)
    base_config: StrategyConfig = field(default_factory=StrategyConfig)

    def __post_init__(self):
        self.strategies = [normalize_strategy(s) for s in self.strategies]
        self.out_dir = Path(self.out_dir)
        if not self.seeds:
            raise ConfigurationError("need at least one seed")
        if any(m < 1 for m in self.ablation_multipliers):
            raise ConfigurationError("ablation multipliers must be positive integers")


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation."""
    vals = list(values)
    if not vals:
        raise ConfigurationError("nothing to aggregate")
    mean = sum(vals) / len(vals)
    std = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
    return mean, std


@dataclass
class StrategyReport:
    strategy: str
    per_seed: list[dict]
    det_acc: tuple[float, float] | None
    cls_acc: tuple[float, float] | None
    failure: str | None = None


@dataclass
class AggregateReport:
    """Per-strategy summaries; recomputable from the stored per-seed values."""

    stddev_convention: str
    strategies: list[StrategyReport] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "stddev_convention": self.stddev_convention,
            "strategies": [
                {
                    "strategy": s.strategy,
                    "per_seed": s.per_seed,
                    "det_acc": list(s.det_acc) if s.det_acc else None,
                    "cls_acc": list(s.cls_acc) if s.cls_acc else None,
                    "failure": s.failure,
                }
                for s in self.strategies
            ],
        }

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True))
        return path


def summarize_run(result: RunResult) -> StrategyReport:
    per_seed = [
        {"seed": r.seed, "det_acc": r.det_acc, "cls_acc": r.cls_acc, "best_epoch": r.best_epoch}
        for r in result.per_seed
    ]
    return StrategyReport(
        strategy=result.strategy,
        per_seed=per_seed,
        det_acc=result.det_acc,
        cls_acc=result.cls_acc,
    )


TrainFn = Callable[[StrategyConfig, DatasetSplits, DatasetSplits | None, Path], RunResult]


def run_experiment(
    spec: ExperimentSpec,
    sim: DatasetSplits,
    real: DatasetSplits | None,
    train_fn: TrainFn | None = None,
    mapping: LaneClassMapping | None = None,
) -> AggregateReport:
    """Train every (strategy, seed), evaluate best checkpoints, write the report.

    ``train_fn`` may replace the full training loop (tests use stubs); it must
    return a ``RunResult``.
    """
    train_fn = train_fn or (lambda cfg, s, r, out: train(cfg, s, r, out, mapping=mapping))
    report = AggregateReport(stddev_convention=STDDEV_CONVENTION)
    for strategy in spec.strategies:
        from dataclasses import replace

        config = replace(spec.base_config, strategy=strategy, seeds=tuple(spec.seeds))
        out = spec.out_dir / strategy
        try:
            result = train_fn(config, sim, real, out)
            report.strategies.append(summarize_run(result))
        except Exception as exc:  # record, never silently drop
            report.strategies.append(
                StrategyReport(
                    strategy=strategy,
                    per_seed=[],
                    det_acc=None,
                    cls_acc=None,
                    failure=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}",
                )
            )
    report.write(spec.out_dir / "report.json")
    return report
