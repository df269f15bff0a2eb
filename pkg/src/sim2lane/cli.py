"""Command-line interface.

Subcommands: generate, train, eval, ablate, visualize, report. Training and
generation read a YAML config file (see configs/ in the repo and the README
for the schema); CARLA connection details come from --carla-host/--carla-port
or the SIM2LANE_CARLA_HOST / SIM2LANE_CARLA_PORT environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import cv2
import numpy as np
import yaml

from .data.augment import AugmentationParams
from .data.dataset import DatasetManifest, DatasetSplits, load_dataset
from .detector.checkpoint import load_checkpoint
from .detector.losses import TaskLossWeights
from .detector.model import DetectorConfig
from .errors import ConfigurationError, Sim2LaneError
from .harness.ablation import run_ablation
from .harness.experiment import ExperimentSpec, aggregate, run_experiment
from .harness.visualize import visualize
from .laneclasses import LaneClassMapping, load_mapping, map_lane_class
from .rowanchor import RowAnchorConfig, default_anchor_rows
from .simgen.generate import GenerationRequest, generate_dataset
from .translation.losses import GenLossWeights
from .translation.networks import TranslationNetConfig
from .uda.evaluate import LanePredictor, evaluate_on_dataset
from .uda.train import StrategyConfig, train


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    data = yaml.safe_load(Path(path).read_text())
    return data or {}


def build_row_anchor(cfg: dict) -> RowAnchorConfig:
    section = dict(cfg.get("row_anchor", {}))
    input_size = tuple(section.get("input_size", (288, 800)))
    if "anchor_rows" in section:
        rows = tuple(section["anchor_rows"])
    else:
        span = section.get("anchor_span", {})
        rows = default_anchor_rows(
            height=input_size[0],
            first=span.get("first", 64 * input_size[0] // 288),
            last=span.get("last", 284 * input_size[0] // 288),
            count=span.get("count", 56),
        )
    return RowAnchorConfig(
        num_lanes=section.get("num_lanes", 4),
        num_cells=section.get("num_cells", 100),
        anchor_rows=rows,
        input_size=input_size,
        native_size=tuple(section.get("native_size", (720, 1280))),
    )


def build_strategy_config(cfg: dict, strategy: str, seed: int | None) -> StrategyConfig:
    train_cfg = dict(cfg.get("train", {}))
    weights = dict(cfg.get("weights", {}))
    aug_cfg = train_cfg.pop("augmentation", None)
    augmentation = None
    if aug_cfg:
        augmentation = AugmentationParams(
            rotation_deg=aug_cfg.get("rotation_deg", 6.0),
            horizontal_shift_px=aug_cfg.get("horizontal_shift_px", 100.0),
            vertical_shift_px=aug_cfg.get("vertical_shift_px", 30.0),
        )
    seeds = tuple(train_cfg.pop("seeds", (0, 1, 2)))
    if seed is not None:
        seeds = (seed,)
    translation_hw = train_cfg.pop("translation_image_hw", None)
    if translation_hw is not None:
        translation_hw = tuple(translation_hw)
    return StrategyConfig(
        strategy=strategy,
        row_anchor=build_row_anchor(cfg),
        detector=DetectorConfig(**cfg.get("detector", {})),
        translation=TranslationNetConfig(**cfg.get("translation", {})),
        gen_weights=GenLossWeights(**weights.get("gen", {})),
        task_weights=TaskLossWeights(**weights.get("task", {})),
        seeds=seeds,
        augmentation=augmentation,
        translation_image_hw=translation_hw,
        **train_cfg,
    )


def _load_splits(root: str | Path, domain: str, with_labels: bool) -> DatasetSplits:
    return DatasetSplits.from_root(root, domain=domain, with_labels=with_labels)


def _mapping_from_config(cfg: dict) -> LaneClassMapping:
    path = cfg.get("class_mapping")
    return load_mapping(path) if path else LaneClassMapping()


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    gen_cfg = dict(cfg.get("generate", {}))
    row_anchor = build_row_anchor(cfg)
    request = GenerationRequest(
        total_frames=args.frames or gen_cfg.get("frames", 60),
        out_root=Path(args.out),
        backend=args.backend or gen_cfg.get("backend", "procedural"),
        maps=tuple(gen_cfg["maps"]) if "maps" in gen_cfg else None,
        row_anchor=row_anchor,
        mapping=_mapping_from_config(cfg),
        seed=args.seed if args.seed is not None else gen_cfg.get("seed", 0),
        color_shift=tuple(gen_cfg.get("color_shift", (0, 0, 0))),
        carla_host=args.carla_host,
        carla_port=args.carla_port,
    )
    manifest = generate_dataset(request)
    print(f"generated {manifest.frame_count} frames under {manifest.root}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    config = build_strategy_config(cfg, args.strategy, args.seed)
    data_cfg = cfg.get("data", {})
    sim_root = args.sim_root or data_cfg.get("sim_root")
    real_root = args.real_root or data_cfg.get("real_root")
    if sim_root is None and config.strategy != "supervised_real":
        raise ConfigurationError("config must name data.sim_root (or pass --sim-root)")
    sim = _load_splits(sim_root, "sim", True) if sim_root else None
    real = _load_splits(real_root, "real", False) if real_root else None
    if sim is None:
        if real is None:
            raise ConfigurationError("supervised_real needs data.real_root")
        sim = DatasetSplits(train=real.train, val=real.val, test=real.test)
    if config.strategy == "supervised_real" and real is not None:
        real = DatasetSplits(
            train=load_dataset(DatasetManifest.resolve(real_root, "train"), "real", True),
            val=real.val,
            test=real.test,
        )
    result = train(config, sim, real, Path(args.out), mapping=_mapping_from_config(cfg))
    det = result.det_acc
    cls = result.cls_acc
    print(f"strategy {result.strategy}: det_acc {det} cls_acc {cls}")
    print(f"per-seed logs and checkpoints under {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    detector, meta = load_checkpoint(args.checkpoint)
    manifest = DatasetManifest.resolve(args.data, args.split)
    dataset = load_dataset(manifest, domain=args.domain, with_labels=True)
    predictor = LanePredictor(detector)
    result = evaluate_on_dataset(predictor, dataset, width_threshold_px=args.threshold)
    payload = {"checkpoint": str(args.checkpoint), "split": args.split, **result.as_log(), **meta}
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    data_cfg = cfg.get("data", {})
    spec = ExperimentSpec(
        strategies=list(cfg.get("ablation", {}).get("strategies", ["direct", "ada"])),
        seeds=tuple(cfg.get("train", {}).get("seeds", (0, 1, 2))),
        out_dir=Path(args.out),
        ablation_multipliers=tuple(cfg.get("ablation", {}).get("multipliers", (1, 2, 3, 4, 5))),
        base_config=build_strategy_config(cfg, "direct", args.seed),
    )
    sim = _load_splits(data_cfg["sim_root"], "sim", True)
    real = _load_splits(data_cfg["real_root"], "real", False)
    curves = run_ablation(
        spec, sim, real, mapping=_mapping_from_config(cfg),
        strategies=tuple(spec.strategies),
    )
    for name, curve in curves.items():
        print(f"{name}: " + ", ".join(f"x{p.multiplier}={p.det_mean}" for p in curve.points))
    print(f"curves and plots under {spec.out_dir / 'ablation'}")
    return 0


def cmd_visualize(args: argparse.Namespace) -> int:
    detector, _ = load_checkpoint(args.checkpoint)
    manifest = DatasetManifest.resolve(args.data, args.split)
    dataset = load_dataset(manifest, domain=args.domain, with_labels=True)
    sample = dataset[args.index]
    predictor = LanePredictor(detector)
    label, classes = predictor.predict(sample.image)
    annotated = visualize(sample.image, label, classes, banner=f"{Path(args.checkpoint).name}")
    cv2.imwrite(str(args.out), cv2.cvtColor(annotated, cv2.COLOR_RGB2BGR))
    print(f"wrote {args.out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    """Re-aggregate stored per-seed run results into one summary table."""
    runs_dir = Path(args.runs)
    rows = []
    for result_file in sorted(runs_dir.glob("**/run_result.json")):
        data = json.loads(result_file.read_text())
        det_vals = [r["det_acc"] for r in data["per_seed"] if r["det_acc"] is not None]
        cls_vals = [r["cls_acc"] for r in data["per_seed"] if r["cls_acc"] is not None]
        rows.append(
            {
                "strategy": data["strategy"],
                "path": str(result_file.parent),
                "det_acc": list(aggregate(det_vals)) if det_vals else None,
                "cls_acc": list(aggregate(cls_vals)) if cls_vals else None,
                "seeds": len(data["per_seed"]),
            }
        )
    report = {"stddev_convention": "population (divisor n)", "runs": rows}
    out = runs_dir / "report.json"
    out.write_text(json.dumps(report, indent=2, sort_keys=True))
    for row in rows:
        print(f"{row['strategy']:18s} det={row['det_acc']} cls={row['cls_acc']} ({row['seeds']} seeds)")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim2lane", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a synthetic dataset")
    p_gen.add_argument("--config", type=Path, default=None)
    p_gen.add_argument("--backend", choices=("procedural", "carla"), default=None)
    p_gen.add_argument("--frames", type=int, default=None)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.add_argument("--carla-host", default=os.environ.get("SIM2LANE_CARLA_HOST", "localhost"))
    p_gen.add_argument("--carla-port", type=int, default=int(os.environ.get("SIM2LANE_CARLA_PORT", "2000")))
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="train one strategy")
    p_train.add_argument(
        "--strategy", required=True,
        choices=("direct", "two-stage-unit", "two-stage-munit", "ada", "unit-adv", "munit-adv", "real"),
    )
    p_train.add_argument("--config", type=Path, required=True)
    p_train.add_argument("--seed", type=int, default=None, help="override the config's seed list")
    p_train.add_argument("--out", type=Path, required=True)
    p_train.add_argument("--sim-root", type=Path, default=None)
    p_train.add_argument("--real-root", type=Path, default=None)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--data", type=Path, required=True)
    p_eval.add_argument("--split", default="test")
    p_eval.add_argument("--domain", default="real")
    p_eval.add_argument("--threshold", type=float, default=20.0)
    p_eval.add_argument("--out", type=Path, default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_abl = sub.add_parser("ablate", help="run the dataset-size ablation")
    p_abl.add_argument("--config", type=Path, required=True)
    p_abl.add_argument("--seed", type=int, default=None)
    p_abl.add_argument("--out", type=Path, required=True)
    p_abl.set_defaults(func=cmd_ablate)

    p_vis = sub.add_parser("visualize", help="overlay predictions on a frame")
    p_vis.add_argument("--checkpoint", type=Path, required=True)
    p_vis.add_argument("--data", type=Path, required=True)
    p_vis.add_argument("--split", default="test")
    p_vis.add_argument("--domain", default="real")
    p_vis.add_argument("--index", type=int, default=0)
    p_vis.add_argument("--out", type=Path, required=True)
    p_vis.set_defaults(func=cmd_visualize)

    p_rep = sub.add_parser("report", help="re-aggregate stored run results")
    p_rep.add_argument("--runs", type=Path, required=True)
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Sim2LaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
