"""Checkpoint container: parameters plus the geometry and run metadata.

On-disk format (torch.save of a dict, format_version 1):

    {"format_version": 1,
     "state_dict": ...,
     "row_anchor": {num_lanes, num_cells, anchor_rows, input_size, native_size},
     "detector": {DetectorConfig fields},
     "seed": int, "epoch": int, "val_det_acc": float}
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import torch

from ..errors import ValidationError
from ..rowanchor import RowAnchorConfig
from .model import DetectorConfig, RowAnchorDetector

FORMAT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    detector: RowAnchorDetector,
    seed: int,
    epoch: int,
    val_det_acc: float,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "state_dict": detector.state_dict(),
        "row_anchor": asdict(detector.cfg),
        "detector": asdict(detector.det_cfg),
        "seed": int(seed),
        "epoch": int(epoch),
        "val_det_acc": float(val_det_acc),
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | Path) -> tuple[RowAnchorDetector, dict]:
    """Rebuild the detector a checkpoint was saved from."""
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if payload.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported checkpoint format {payload.get('format_version')!r}")
    ra = payload["row_anchor"]
    ra["anchor_rows"] = tuple(ra["anchor_rows"])
    ra["input_size"] = tuple(ra["input_size"])
    ra["native_size"] = tuple(ra["native_size"])
    det = payload["detector"]
    det["stage_channels"] = tuple(det["stage_channels"])
    det["normalize_mean"] = tuple(det["normalize_mean"])
    det["normalize_std"] = tuple(det["normalize_std"])
    detector = RowAnchorDetector(RowAnchorConfig(**ra), DetectorConfig(**det))
    detector.load_state_dict(payload["state_dict"])
    meta = {k: payload[k] for k in ("seed", "epoch", "val_det_acc")}
    return detector, meta
