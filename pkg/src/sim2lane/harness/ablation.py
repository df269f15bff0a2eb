"""Simulation dataset-size ablation.

For each multiplier m the sim training pool is an independent uniform draw
of m times the real training set size; every epoch then resamples a 1x-sized
working set from that pool so each strategy sees the same per-epoch budget.
Subsets for different multipliers are drawn independently (reproducible by
seed), not nested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from ..data.dataset import DatasetSplits, FrameDataset
from ..data.streams import resample_indices
from ..errors import ConfigurationError
from ..laneclasses import LaneClassMapping
from ..uda.train import RunResult, StrategyConfig, train
from .experiment import ExperimentSpec, aggregate
from .plots import curve_plot

ABLATION_STRATEGIES = ("direct", "ada")


@dataclass
class AblationPoint:
    multiplier: int
    det_mean: float | None
    det_std: float | None
    cls_mean: float | None
    cls_std: float | None
    per_seed: list[dict] = field(default_factory=list)


@dataclass
class AblationCurves:
    strategy: str
    points: list[AblationPoint]


def subset_for_multiplier(
    full_sim: FrameDataset, multiplier: int, real_train_size: int, seed: int
) -> FrameDataset:
    """Independent uniform draw of multiplier * real_train_size frames."""
    want = multiplier * real_train_size
    if want > len(full_sim):
        raise ConfigurationError(
            f"multiplier {multiplier} needs {want} sim frames but only {len(full_sim)} exist"
        )
    idx = resample_indices(len(full_sim), want, epoch_index=multiplier, seed=seed)
    return full_sim.subset([int(i) for i in idx])


def run_ablation(
    spec: ExperimentSpec,
    full_sim: DatasetSplits,
    real: DatasetSplits,
    train_fn: Callable | None = None,
    mapping: LaneClassMapping | None = None,
    strategies: tuple[str, ...] = ABLATION_STRATEGIES,
) -> dict[str, AblationCurves]:
    """Train each strategy at every multiplier; emit curves, bands and plots."""
    real_size = len(real.train)
    max_mult = max(spec.ablation_multipliers)
    if max_mult * real_size > len(full_sim.train):
        raise ConfigurationError(
            f"full sim dataset ({len(full_sim.train)}) smaller than "
            f"{max_mult}x the real training size ({max_mult * real_size})"
        )
    train_fn = train_fn or (lambda cfg, s, r, out: train(cfg, s, r, out, mapping=mapping))

    curves: dict[str, AblationCurves] = {}
    for strategy in strategies:
        points = []
        for m in spec.ablation_multipliers:
            pool = subset_for_multiplier(full_sim.train, m, real_size, seed=spec.seeds[0])
            sim_m = DatasetSplits(train=pool, val=full_sim.val, test=full_sim.test)
            config = replace(
                spec.base_config,
                strategy=strategy,
                seeds=tuple(spec.seeds),
                epoch_subset_size=real_size,
            )
            out = spec.out_dir / "ablation" / f"{strategy}_x{m}"
            result: RunResult = train_fn(config, sim_m, real, out)
            det_vals = [r.det_acc for r in result.per_seed if r.det_acc is not None]
            cls_vals = [r.cls_acc for r in result.per_seed if r.cls_acc is not None]
            det = aggregate(det_vals) if det_vals else (None, None)
            cls = aggregate(cls_vals) if cls_vals else (None, None)
            points.append(
                AblationPoint(
                    multiplier=m,
                    det_mean=det[0], det_std=det[1],
                    cls_mean=cls[0], cls_std=cls[1],
                    per_seed=[
                        {"seed": r.seed, "det_acc": r.det_acc, "cls_acc": r.cls_acc}
                        for r in result.per_seed
                    ],
                )
            )
        curves[strategy] = AblationCurves(strategy=strategy, points=points)

    _write_outputs(spec.out_dir / "ablation", curves)
    return curves


def _write_outputs(out_dir: Path, curves: dict[str, AblationCurves]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        name: [
            {
                "multiplier": p.multiplier,
                "det_mean": p.det_mean, "det_std": p.det_std,
                "cls_mean": p.cls_mean, "cls_std": p.cls_std,
                "per_seed": p.per_seed,
            }
            for p in c.points
        ]
        for name, c in curves.items()
    }
    (out_dir / "ablation.json").write_text(json.dumps(payload, indent=2, sort_keys=True))

    for metric, label in (("det", "detection accuracy"), ("cls", "classification accuracy")):
        series = {}
        for name, c in curves.items():
            xs = [p.multiplier for p in c.points]
            means = [getattr(p, f"{metric}_mean") for p in c.points]
            stds = [getattr(p, f"{metric}_std") for p in c.points]
            if any(m is None for m in means):
                continue
            series[name] = (xs, means, stds)
        if series:
            curve_plot(
                series,
                xlabel="simulation dataset size multiplier",
                ylabel=label,
                out_path=out_dir / f"ablation_{metric}.png",
            )
