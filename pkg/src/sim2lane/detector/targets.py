"""Batch assembly: images and encoded targets as tensors, seg rasterization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import cv2
import numpy as np
import torch

from ..errors import ValidationError
from ..laneclasses import LaneClassMapping, map_lane_class
from ..rowanchor import LanePointLabel, RowAnchorConfig, encode_targets
from .model import RowAnchorDetector

SEG_STROKE_PX = 5  # stroke width at full input resolution
SEG_STRIDE = 8


def rasterize_segmentation(label: LanePointLabel, cfg: RowAnchorConfig) -> np.ndarray:
    """Lane-instance map at 1/8 input resolution.

    Lanes are drawn as 5-px strokes on the full-resolution grid and reduced
    by block max so thin strokes survive the downsampling. Class 0 is
    background; lane slot i paints class i+1.
    """
    h_in, w_in = cfg.input_size
    canvas = np.zeros((h_in, w_in), dtype=np.uint8)
    sx = 1.0 / cfg.x_scale
    sy = 1.0 / cfg.row_scale
    for i in range(min(label.num_lanes, cfg.num_lanes)):
        pts = label.present_points(i)
        if pts.shape[0] < 2:
            continue
        poly = np.stack([pts[:, 1] * sx, pts[:, 0] * sy], axis=1)
        poly = np.round(poly).astype(np.int32)
        cv2.polylines(canvas, [poly], isClosed=False, color=int(i + 1), thickness=SEG_STROKE_PX)
    blocks = canvas.reshape(h_in // SEG_STRIDE, SEG_STRIDE, w_in // SEG_STRIDE, SEG_STRIDE)
    return blocks.max(axis=(1, 3)).astype(np.int64)


@dataclass
class DetectorBatch:
    """Tensors for one training step."""

    images: torch.Tensor          # (B, 3, H, W) normalized
    location_targets: torch.Tensor  # (B, C, h) cell indices
    class_targets: torch.Tensor     # (B, C) super-class ids (0 where absent)
    presence: torch.Tensor          # (B, C) bool
    seg_targets: torch.Tensor       # (B, H/8, W/8) instance classes

    def __len__(self) -> int:
        return self.images.shape[0]


def build_batch(
    samples: Sequence,
    detector: RowAnchorDetector,
    mapping: LaneClassMapping | None = None,
) -> DetectorBatch:
    """Encode labelled frames into detector training tensors.

    Images are resized to the configured input size; labels stay in native
    coordinates (the row-anchor encoding handles the rescale).
    """
    cfg = detector.cfg
    mapping = mapping or LaneClassMapping()
    images, loc_t, cls_t, pres_t, seg_t = [], [], [], [], []
    h_in, w_in = cfg.input_size
    for sample in samples:
        if sample.label is None:
            raise ValidationError(f"sample {sample.source_path} has no label")
        img = sample.image
        if img.shape[:2] != (h_in, w_in):
            if img.shape[:2] != tuple(cfg.native_size):
                raise ValidationError(
                    f"image size {img.shape[:2]} matches neither the input nor native size"
                )
            img = cv2.resize(img, (w_in, h_in), interpolation=cv2.INTER_LINEAR)
        images.append(detector.normalize_image(img))
        grid = encode_targets(sample.label, cfg)
        super_ids = np.zeros(cfg.num_lanes, dtype=np.int64)
        for i in range(cfg.num_lanes):
            if grid.presence[i] and grid.class_targets[i] >= 0:
                super_ids[i] = int(map_lane_class(int(grid.class_targets[i]), mapping))
        loc_t.append(torch.from_numpy(grid.cells))
        cls_t.append(torch.from_numpy(super_ids))
        pres_t.append(torch.from_numpy(grid.presence.copy()))
        seg_t.append(torch.from_numpy(rasterize_segmentation(sample.label, cfg)))
    return DetectorBatch(
        images=torch.stack(images),
        location_targets=torch.stack(loc_t),
        class_targets=torch.stack(cls_t),
        presence=torch.stack(pres_t),
        seg_targets=torch.stack(seg_t),
    )
