"""Strategy orchestration: full training runs, model selection, aggregation.

Strategies:
  direct           task loss on labelled sim data only
  two_stage_unit   translation trained first, detector trained on exported
  two_stage_munit  translated sim images
  ada              detector backbone as shared encoder + feature discriminator
  unit_adv         joint translation + latent detector (+ feature disc)
  munit_adv        content-style variant of the joint loop
  supervised_real  upper bound trained on labelled real data

Each epoch ends with a validation pass; the checkpoint with the highest
validation detection accuracy is kept (ties go to the earlier epoch) and the
per-epoch metric record is appended to ``metrics.jsonl``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch

from ..data.augment import AugmentationParams, augment
from ..data.dataset import DatasetManifest, DatasetSplits, FrameDataset, FrameSample, load_dataset
from ..data.streams import labelled_batches, resample_subset, steps_per_epoch, unpaired_batches
from ..detector.checkpoint import load_checkpoint, save_checkpoint
from ..detector.losses import TaskLossWeights
from ..detector.model import DetectorConfig, RowAnchorDetector
from ..errors import ConfigurationError
from ..laneclasses import LaneClassMapping
from ..rowanchor import RowAnchorConfig
from ..translation.losses import GenLossWeights
from ..translation.networks import TranslationNetConfig, build_feature_extractor
from ..translation.state import TranslationState, export_translated_dataset
from ..uda.evaluate import LanePredictor, evaluate_on_dataset
from .schedule import LrSchedule
from .trainers import AdaTrainer, GenerativeTrainer, SupervisedTrainer

STRATEGIES = (
    "direct",
    "two_stage_unit",
    "two_stage_munit",
    "ada",
    "unit_adv",
    "munit_adv",
    "supervised_real",
)

_CLI_ALIASES = {
    "two-stage-unit": "two_stage_unit",
    "two-stage-munit": "two_stage_munit",
    "unit-adv": "unit_adv",
    "munit-adv": "munit_adv",
    "real": "supervised_real",
}


def normalize_strategy(name: str) -> str:
    name = _CLI_ALIASES.get(name, name)
    if name not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {name!r}; choose from {STRATEGIES}")
    return name


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "direct"
    row_anchor: RowAnchorConfig = field(default_factory=RowAnchorConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    translation: TranslationNetConfig = field(default_factory=TranslationNetConfig)
    gen_weights: GenLossWeights = field(default_factory=GenLossWeights)
    task_weights: TaskLossWeights = field(default_factory=TaskLossWeights)
    detector_lr: float = 4e-4
    disc_lr: float = 4e-4
    encgen_lr: float = 1e-4
    warmup_epochs: int = 25
    max_epochs: int = 100
    stage1_epochs: int | None = None
    batch_size: int = 8
    seeds: tuple[int, ...] = (0, 1, 2)
    augmentation: AugmentationParams | None = None
    width_threshold_px: float = 20.0
    perceptual_extractor: str = "random"
    translation_image_hw: tuple[int, int] | None = None
    keep_all_checkpoints: bool = False
    decode_refine: str = "expectation"
    epoch_subset_size: int | None = None  # per-epoch sim resampling (ablation)

    def __post_init__(self):
        object.__setattr__(self, "strategy", normalize_strategy(self.strategy))
        if min(self.detector_lr, self.disc_lr, self.encgen_lr) <= 0:
            raise ConfigurationError("learning rates must be positive")
        if self.max_epochs < 1:
            raise ConfigurationError("max_epochs must be at least 1")
        if not 0 <= self.warmup_epochs < self.max_epochs and self.is_generative:
            raise ConfigurationError("warmup must fit inside the training horizon")
        if not self.seeds:
            raise ConfigurationError("need at least one seed")

    @property
    def is_generative(self) -> bool:
        return self.strategy in ("unit_adv", "munit_adv")

    @property
    def translation_mode(self) -> str:
        return "munit" if "munit" in self.strategy else "unit"


@dataclass
class EpochRecord:
    epoch: int
    val_det_acc: float
    checkpoint_path: str | None = None


@dataclass
class SeedRunRecord:
    seed: int
    best_epoch: int
    best_checkpoint: str | None
    val_det_acc: float
    det_acc: float | None
    cls_acc: float | None
    metrics_log: str
    extra: dict = field(default_factory=dict)


@dataclass
class RunResult:
    strategy: str
    per_seed: list[SeedRunRecord]

    def _agg(self, values: list[float | None]) -> tuple[float, float] | None:
        kept = [v for v in values if v is not None]
        if not kept:
            return None
        mean = sum(kept) / len(kept)
        std = math.sqrt(sum((v - mean) ** 2 for v in kept) / len(kept))
        return mean, std

    @property
    def det_acc(self) -> tuple[float, float] | None:
        """(mean, population stddev) over seeds."""
        return self._agg([r.det_acc for r in self.per_seed])

    @property
    def cls_acc(self) -> tuple[float, float] | None:
        return self._agg([r.cls_acc for r in self.per_seed])


def select_best_checkpoint(run: Sequence[EpochRecord]) -> EpochRecord:
    """Highest validation detection accuracy wins; ties go to the earliest
    epoch. Classification accuracy plays no part in selection."""
    records = list(run)
    if not records:
        raise ConfigurationError("no evaluated epochs to select from")
    best = records[0]
    for rec in records[1:]:
        if rec.val_det_acc > best.val_det_acc:
            best = rec
    return best


class MetricLog:
    """JSON-lines metric log, one record per epoch."""

    def __init__(self, path: Path):
        self.path = path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("")

    def append(self, record: dict) -> None:
        with open(self.path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _augment_batch(
    samples: list[FrameSample],
    params: AugmentationParams | None,
    seed: int,
    epoch: int,
    step: int,
) -> list[FrameSample]:
    if params is None or params.is_identity:
        return samples
    rng = np.random.default_rng([seed, 11, epoch, step])
    return [augment(s, params, int(rng.integers(2**31))) for s in samples]


def _epoch_train_ds(config: StrategyConfig, ds: FrameDataset, seed: int, epoch: int) -> FrameDataset:
    """Apply the ablation's per-epoch subset resampling when configured."""
    if config.epoch_subset_size is None or config.epoch_subset_size >= len(ds):
        return ds
    return resample_subset(ds, config.epoch_subset_size, epoch_index=epoch, seed=seed)


def _mean_logs(step_logs: list[dict[str, float]]) -> dict[str, float]:
    keys = sorted({k for log in step_logs for k in log})
    out = {}
    for k in keys:
        vals = [log[k] for log in step_logs if k in log]
        out[k] = sum(vals) / len(vals)
    return out


def _val_and_test(config: StrategyConfig, sim: DatasetSplits, real: DatasetSplits | None):
    val = (real.val if real else None) or sim.val
    test = (real.test if real else None) or val
    if val is None:
        raise ConfigurationError("training needs a validation split (real.val or sim.val)")
    return val, test


def _epoch_loop(
    config: StrategyConfig,
    seed: int,
    out_dir: Path,
    detector: RowAnchorDetector,
    run_epoch: Callable[[int], list[dict[str, float]]],
    val_ds: FrameDataset,
    predictor: LanePredictor,
    epochs: int,
    extra_eval: Callable[[], dict] | None = None,
) -> tuple[list[EpochRecord], MetricLog]:
    """Shared epoch driver: train, evaluate, checkpoint, log."""
    log = MetricLog(out_dir / "metrics.jsonl")
    records: list[EpochRecord] = []
    best: EpochRecord | None = None
    for epoch in range(epochs):
        step_logs = run_epoch(epoch)
        result = evaluate_on_dataset(predictor, val_ds, config.width_threshold_px)
        val_det = result.det_acc if result.det_acc is not None else float("nan")
        record = EpochRecord(epoch=epoch, val_det_acc=val_det)

        last_path = save_checkpoint(out_dir / "last.pt", detector, seed, epoch, val_det)
        record.checkpoint_path = str(last_path)
        if config.keep_all_checkpoints:
            kept = save_checkpoint(out_dir / f"epoch{epoch:04d}.pt", detector, seed, epoch, val_det)
            record.checkpoint_path = str(kept)
        records.append(record)
        if best is None or record.val_det_acc > best.val_det_acc:
            best_path = save_checkpoint(out_dir / "best.pt", detector, seed, epoch, val_det)
            best = EpochRecord(epoch=epoch, val_det_acc=val_det, checkpoint_path=str(best_path))

        entry = {
            "epoch": epoch,
            "losses": _mean_logs(step_logs),
            "val_det_acc": result.det_acc,
            "val_cls_acc": result.cls_acc,
            "lr": step_logs[-1].get("lr") if step_logs else None,
        }
        if extra_eval is not None:
            entry.update(extra_eval())
        log.append(entry)
    # Rewrite best.pt bookkeeping so selection semantics hold even when the
    # last epoch tied an earlier best (earliest wins; strict > above ensures it).
    selected = select_best_checkpoint(records)
    records[selected.epoch].checkpoint_path = str(out_dir / "best.pt")
    return records, log


def _train_supervised(
    config: StrategyConfig,
    train_ds: FrameDataset,
    val_ds: FrameDataset,
    seed: int,
    out_dir: Path,
    mapping: LaneClassMapping,
) -> tuple[list[EpochRecord], MetricLog, RowAnchorDetector]:
    torch.manual_seed(seed)
    detector = RowAnchorDetector(config.row_anchor, config.detector)
    epoch_size = min(config.epoch_subset_size or len(train_ds), len(train_ds))
    total_steps = steps_per_epoch(epoch_size, config.batch_size) * config.max_epochs
    schedule = LrSchedule(peak=config.detector_lr, total_steps=total_steps, warmup_steps=0)
    trainer = SupervisedTrainer(detector, config.task_weights, schedule, mapping)
    predictor = LanePredictor(detector, mapping, refine=config.decode_refine)

    def run_epoch(epoch: int) -> list[dict[str, float]]:
        logs = []
        ds = _epoch_train_ds(config, train_ds, seed, epoch)
        for step, batch in enumerate(
            labelled_batches(ds, config.batch_size, seed=seed * 7919 + epoch)
        ):
            batch = _augment_batch(batch, config.augmentation, seed, epoch, step)
            logs.append(trainer.step(batch))
        return logs

    records, log = _epoch_loop(
        config, seed, out_dir, detector, run_epoch, val_ds, predictor, config.max_epochs
    )
    return records, log, detector


def _train_ada(
    config: StrategyConfig,
    sim: DatasetSplits,
    real: DatasetSplits,
    val_ds: FrameDataset,
    seed: int,
    out_dir: Path,
    mapping: LaneClassMapping,
) -> tuple[list[EpochRecord], MetricLog, RowAnchorDetector]:
    torch.manual_seed(seed)
    detector = RowAnchorDetector(config.row_anchor, config.detector)
    epoch_size = min(config.epoch_subset_size or len(sim.train), len(sim.train))
    total_steps = steps_per_epoch(epoch_size, config.batch_size) * config.max_epochs
    det_schedule = LrSchedule(peak=config.detector_lr, total_steps=total_steps)
    disc_schedule = LrSchedule(peak=config.disc_lr, total_steps=total_steps)
    trainer = AdaTrainer(
        detector, config.task_weights, config.gen_weights, det_schedule, disc_schedule, mapping
    )
    predictor = LanePredictor(detector, mapping, refine=config.decode_refine)

    heldout_sim = sim.val or sim.train
    heldout_real = real.val or real.train

    def run_epoch(epoch: int) -> list[dict[str, float]]:
        logs = []
        ds = _epoch_train_ds(config, sim.train, seed, epoch)
        stream = unpaired_batches(
            ds, real.train, config.batch_size, seed=seed * 7919 + epoch
        )
        for step, (sim_batch, real_batch) in enumerate(stream):
            sim_batch = _augment_batch(sim_batch, config.augmentation, seed, epoch, step)
            real_batch = _augment_batch(real_batch, config.augmentation, seed, epoch, 10_000 + step)
            logs.append(trainer.step(sim_batch, real_batch))
        return logs

    def extra_eval() -> dict:
        acc = trainer.discriminator_accuracy(list(heldout_sim), list(heldout_real))
        return {"fea_disc_val_acc": acc}

    records, log = _epoch_loop(
        config, seed, out_dir, detector, run_epoch, val_ds, predictor, config.max_epochs,
        extra_eval=extra_eval,
    )
    return records, log, detector


def _train_generative(
    config: StrategyConfig,
    sim: DatasetSplits,
    real: DatasetSplits,
    val_ds: FrameDataset,
    seed: int,
    out_dir: Path,
    mapping: LaneClassMapping,
) -> tuple[list[EpochRecord], MetricLog, RowAnchorDetector, TranslationState]:
    torch.manual_seed(seed)
    state = TranslationState(config.translation_mode, config.translation)
    det_cfg = replace(
        config.detector, in_channels=state.latent_channels, input_stride=4,
        stage_channels=config.detector.stage_channels[:2],
    )
    detector = RowAnchorDetector(config.row_anchor, det_cfg)
    extractor = None
    if config.gen_weights.perceptual > 0:
        extractor = build_feature_extractor(config.perceptual_extractor, seed=0)

    spe = steps_per_epoch(len(sim.train), config.batch_size)
    total_steps = spe * config.max_epochs
    warmup_steps = spe * config.warmup_epochs
    trainer = GenerativeTrainer(
        state,
        config.gen_weights,
        encgen_schedule=LrSchedule(config.encgen_lr, total_steps, warmup_steps),
        disc_schedule=LrSchedule(config.disc_lr, total_steps, warmup_steps),
        feature_extractor=extractor,
        detector=detector,
        detector_schedule=LrSchedule(config.detector_lr, total_steps, warmup_steps),
        task_weights=config.task_weights,
        with_feature_disc=config.gen_weights.adv_fea > 0,
        mapping=mapping,
        image_hw=config.row_anchor.input_size,
        torch_seed=seed,
    )
    predictor = LanePredictor(
        detector, mapping, refine=config.decode_refine, encoder_state=state, encode_domain="real"
    )

    def run_epoch(epoch: int) -> list[dict[str, float]]:
        logs = []
        stream = unpaired_batches(
            sim.train, real.train, config.batch_size, seed=seed * 7919 + epoch
        )
        for step, (sim_batch, real_batch) in enumerate(stream):
            sim_batch = _augment_batch(sim_batch, config.augmentation, seed, epoch, step)
            real_batch = _augment_batch(real_batch, config.augmentation, seed, epoch, 10_000 + step)
            logs.append(trainer.step(sim_batch, real_batch))
        return logs

    records, log = _epoch_loop(
        config, seed, out_dir, detector, run_epoch, val_ds, predictor, config.max_epochs
    )
    torch.save(state.state_dict(), out_dir / "translation.pt")
    return records, log, detector, state


def train_translation_only(
    mode: str,
    config: StrategyConfig,
    sim_train: FrameDataset,
    real_train: FrameDataset,
    seed: int,
    out_dir: Path,
    epochs: int,
    image_hw: tuple[int, int] | None = None,
) -> tuple[TranslationState, list[dict[str, float]]]:
    """First phase of the two-stage strategies: no task losses, no feature disc."""
    torch.manual_seed(seed)
    state = TranslationState(mode, config.translation)
    weights = replace(config.gen_weights, task=0.0, cyc_task=0.0, adv_fea=0.0)
    extractor = None
    if weights.perceptual > 0:
        extractor = build_feature_extractor(config.perceptual_extractor, seed=0)
    spe = steps_per_epoch(len(sim_train), config.batch_size)
    total_steps = max(spe * epochs, 2)
    warmup_steps = min(spe * config.warmup_epochs, total_steps - 1)
    trainer = GenerativeTrainer(
        state,
        weights,
        encgen_schedule=LrSchedule(config.encgen_lr, total_steps, warmup_steps),
        disc_schedule=LrSchedule(config.disc_lr, total_steps, warmup_steps),
        feature_extractor=extractor,
        image_hw=image_hw or config.translation_image_hw or config.row_anchor.input_size,
        torch_seed=seed,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    log = MetricLog(out_dir / "translation_metrics.jsonl")
    epoch_logs = []
    for epoch in range(epochs):
        logs = []
        stream = unpaired_batches(sim_train, real_train, config.batch_size, seed=seed * 7919 + epoch)
        for sim_batch, real_batch in stream:
            logs.append(trainer.step(sim_batch, real_batch))
        mean = _mean_logs(logs)
        log.append({"epoch": epoch, "losses": mean})
        epoch_logs.append(mean)
    torch.save(state.state_dict(), out_dir / "translation.pt")
    return state, epoch_logs


def _train_one_seed(
    config: StrategyConfig,
    sim: DatasetSplits,
    real: DatasetSplits | None,
    seed: int,
    out_dir: Path,
    mapping: LaneClassMapping,
) -> SeedRunRecord:
    out_dir.mkdir(parents=True, exist_ok=True)
    val_ds, test_ds = _val_and_test(config, sim, real)
    strategy = config.strategy
    state = None

    if strategy == "direct":
        records, log, detector = _train_supervised(config, sim.train, val_ds, seed, out_dir, mapping)
    elif strategy == "supervised_real":
        if real is None or real.train is None or not real.train.with_labels:
            raise ConfigurationError("supervised_real requires labelled real training data")
        records, log, detector = _train_supervised(config, real.train, val_ds, seed, out_dir, mapping)
    elif strategy in ("two_stage_unit", "two_stage_munit"):
        if real is None:
            raise ConfigurationError(f"{strategy} requires real-domain data")
        stage1_epochs = config.stage1_epochs or config.max_epochs
        state, _ = train_translation_only(
            config.translation_mode, config, sim.train, real.train, seed, out_dir / "stage1",
            epochs=stage1_epochs,
        )
        translated_root = export_translated_dataset(
            state, sim.train, out_dir / "translated", style_seed=seed
        )
        # Re-read from disk so stage 2 consumes exactly the exported layout.
        manifest = DatasetManifest.resolve(translated_root, "train")
        translated = load_dataset(manifest, domain="sim", with_labels=True)
        records, log, detector = _train_supervised(config, translated, val_ds, seed, out_dir, mapping)
    elif strategy == "ada":
        if real is None:
            raise ConfigurationError("ada requires real-domain data")
        records, log, detector = _train_ada(config, sim, real, val_ds, seed, out_dir, mapping)
    else:  # unit_adv / munit_adv
        if real is None:
            raise ConfigurationError(f"{strategy} requires real-domain data")
        records, log, detector, state = _train_generative(
            config, sim, real, val_ds, seed, out_dir, mapping
        )

    best = select_best_checkpoint(records)
    # Final metrics come from the best checkpoint: detection on the test
    # split, classification on the validation split.
    best_detector, _ = load_checkpoint(out_dir / "best.pt")
    predictor = LanePredictor(
        best_detector, mapping, refine=config.decode_refine,
        encoder_state=state if config.is_generative else None,
    )
    test_result = evaluate_on_dataset(predictor, test_ds, config.width_threshold_px)
    val_result = evaluate_on_dataset(predictor, val_ds, config.width_threshold_px)
    return SeedRunRecord(
        seed=seed,
        best_epoch=best.epoch,
        best_checkpoint=str(out_dir / "best.pt"),
        val_det_acc=best.val_det_acc,
        det_acc=test_result.det_acc,
        cls_acc=val_result.cls_acc,
        metrics_log=str(log.path),
    )


def train(
    config: StrategyConfig,
    sim: DatasetSplits,
    real: DatasetSplits | None,
    out_dir: str | Path,
    mapping: LaneClassMapping | None = None,
) -> RunResult:
    """Run the configured strategy once per seed and aggregate the results."""
    out_dir = Path(out_dir)
    mapping = mapping or LaneClassMapping()
    per_seed = [
        _train_one_seed(config, sim, real, seed, out_dir / f"seed{seed}", mapping)
        for seed in config.seeds
    ]
    result = RunResult(strategy=config.strategy, per_seed=per_seed)
    summary = {
        "strategy": config.strategy,
        "per_seed": [
            {
                "seed": r.seed,
                "best_epoch": r.best_epoch,
                "det_acc": r.det_acc,
                "cls_acc": r.cls_acc,
                "val_det_acc": r.val_det_acc,
            }
            for r in per_seed
        ],
        "det_acc": result.det_acc,
        "cls_acc": result.cls_acc,
    }
    (out_dir / "run_result.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return result
