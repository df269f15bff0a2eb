"""Geometric training augmentation: rotation plus horizontal/vertical shift.

The same affine transform is applied to the image and to the label points.
Because labels live on a fixed row grid, transformed lane polylines are
re-sampled at the original rows by linear interpolation; rows the transformed
lane no longer covers, and points leaving the image, become absent.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..errors import ConfigurationError
from ..rowanchor import ABSENT_X, LanePointLabel
from .dataset import FrameSample


@dataclass(frozen=True)
class AugmentationParams:
    """Symmetric ranges; a value r means the offset is drawn from [-r, r]."""

    rotation_deg: float = 6.0
    horizontal_shift_px: float = 100.0
    vertical_shift_px: float = 30.0

    def __post_init__(self):
        if min(self.rotation_deg, self.horizontal_shift_px, self.vertical_shift_px) < 0:
            raise ConfigurationError("augmentation ranges must be nonnegative")

    @property
    def is_identity(self) -> bool:
        return self.rotation_deg == 0 and self.horizontal_shift_px == 0 and self.vertical_shift_px == 0


def _affine_matrix(angle_deg: float, dx: float, dy: float, size: tuple[int, int]) -> np.ndarray:
    """2x3 matrix rotating about the image center then translating."""
    h, w = size
    mat = cv2.getRotationMatrix2D((w / 2.0, h / 2.0), angle_deg, 1.0)
    mat[0, 2] += dx
    mat[1, 2] += dy
    return mat


def transform_points(points: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x3 affine matrix to (x, y) point rows."""
    pts = np.asarray(points, dtype=float)
    return pts @ mat[:, :2].T + mat[:, 2]


def _resample_lane(points_xy: np.ndarray, rows: np.ndarray, width: int) -> np.ndarray:
    """Linearly interpolate transformed lane points back onto the row grid."""
    xs = np.full(rows.shape, ABSENT_X)
    if points_xy.shape[0] < 2:
        return xs
    order = np.argsort(points_xy[:, 1])
    ys = points_xy[order, 1]
    pxs = points_xy[order, 0]
    lo, hi = ys[0], ys[-1]
    covered = (rows >= lo) & (rows <= hi)
    interp = np.interp(rows[covered], ys, pxs)
    inside = (interp >= 0) & (interp < width)
    out = np.full(interp.shape, ABSENT_X)
    out[inside] = interp[inside]
    xs[covered] = out
    return xs


def augment(sample: FrameSample, params: AugmentationParams, rng_seed: int) -> FrameSample:
    """Randomly rotated and shifted copy of a frame, deterministic in the seed."""
    if params.is_identity:
        return sample

    rng = np.random.default_rng(rng_seed)
    angle = rng.uniform(-params.rotation_deg, params.rotation_deg)
    dx = rng.uniform(-params.horizontal_shift_px, params.horizontal_shift_px)
    dy = rng.uniform(-params.vertical_shift_px, params.vertical_shift_px)
    return apply_geometric(sample, angle, dx, dy)


def apply_geometric(sample: FrameSample, angle_deg: float, dx: float, dy: float) -> FrameSample:
    """Apply an explicit rotation/shift; exposed so tests can pin transforms."""
    h, w = sample.image.shape[:2]
    mat = _affine_matrix(angle_deg, dx, dy, (h, w))
    image = cv2.warpAffine(sample.image, mat, (w, h), flags=cv2.INTER_LINEAR)

    label = sample.label
    if label is not None:
        xs = np.full_like(label.xs, ABSENT_X)
        presence = []
        for i in range(label.num_lanes):
            pts = label.present_points(i)  # (row, x) pairs
            if pts.shape[0] == 0:
                presence.append(False)
                continue
            moved = transform_points(pts[:, ::-1], mat)  # to (x, y), then affine
            xs[i] = _resample_lane(moved, label.rows, w)
            presence.append(bool((xs[i] >= 0).any()))
        label = LanePointLabel(
            rows=label.rows.copy(),
            xs=xs,
            raw_class_ids=list(label.raw_class_ids),
            presence=presence,
        )
    return FrameSample(image=image, label=label, domain=sample.domain, source_path=sample.source_path)
