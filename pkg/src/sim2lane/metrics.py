"""Point-level detection accuracy and per-lane classification accuracy.

Detection accuracy is the ratio of correctly predicted points to ground-truth
points accumulated over all frames of a clip. A predicted point is correct
when its x position differs from the matched ground-truth lane's x by less
than a width threshold (native pixels). Predicted and ground-truth lanes are
matched greedily by the number of correct points they would score together;
absent predictions at a labelled row never count as correct.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import UndefinedMetricError, ValidationError
from .rowanchor import LanePointLabel

DEFAULT_WIDTH_THRESHOLD_PX = 20.0


@dataclass
class MetricAccumulator:
    """Running correct/ground-truth point counts plus per-frame tallies."""

    correct_points: int = 0
    gt_points: int = 0
    per_frame: list[tuple[int, int]] = field(default_factory=list)

    def add_frame(self, correct: int, total: int) -> None:
        if not 0 <= correct <= total:
            raise ValidationError(f"frame tally out of range: {correct}/{total}")
        self.correct_points += correct
        self.gt_points += total
        self.per_frame.append((correct, total))

    def accuracy(self) -> float:
        if self.gt_points == 0:
            raise UndefinedMetricError("no ground-truth points were accumulated")
        return self.correct_points / self.gt_points


def _correct_count(gt_xs: np.ndarray, pred_xs: np.ndarray, threshold: float) -> int:
    """Correct points if this gt lane were matched to this predicted lane."""
    visible = gt_xs >= 0
    if not visible.any():
        return 0
    pred = pred_xs[visible]
    gt = gt_xs[visible]
    hits = (pred >= 0) & (np.abs(pred - gt) < threshold)
    return int(hits.sum())


def _match_frame(pred: LanePointLabel, gt: LanePointLabel, threshold: float) -> tuple[int, int]:
    """Greedy lane matching for one frame; returns (correct, gt point count)."""
    if pred.rows.shape != gt.rows.shape or not np.allclose(pred.rows, gt.rows):
        raise ValidationError("prediction and ground truth must share the same sample rows")

    gt_lanes = [i for i in range(gt.num_lanes) if (gt.xs[i] >= 0).any()]
    pred_lanes = [i for i in range(pred.num_lanes) if (pred.xs[i] >= 0).any()]
    total = int((gt.xs[gt_lanes] >= 0).sum()) if gt_lanes else 0

    # Mean x of visible points orders gt lanes left to right for tie breaks.
    gt_mean_x = {i: float(gt.xs[i][gt.xs[i] >= 0].mean()) for i in gt_lanes}
    candidates = [
        (_correct_count(gt.xs[g], pred.xs[p], threshold), g, p)
        for g in gt_lanes
        for p in pred_lanes
    ]
    candidates.sort(key=lambda c: (-c[0], gt_mean_x[c[1]], c[2]))

    used_gt: set[int] = set()
    used_pred: set[int] = set()
    correct = 0
    for count, g, p in candidates:
        if count == 0 or g in used_gt or p in used_pred:
            continue
        used_gt.add(g)
        used_pred.add(p)
        correct += count
    return correct, total


def tusimple_accuracy(
    preds: Sequence[LanePointLabel] | LanePointLabel,
    gts: Sequence[LanePointLabel] | LanePointLabel,
    width_threshold_px: float = DEFAULT_WIDTH_THRESHOLD_PX,
) -> float:
    """Clip-level detection accuracy: correct points / ground-truth points."""
    if width_threshold_px <= 0:
        raise ValidationError("width threshold must be positive")
    if isinstance(preds, LanePointLabel):
        preds = [preds]
    if isinstance(gts, LanePointLabel):
        gts = [gts]
    if len(preds) != len(gts):
        raise ValidationError("need one prediction per ground-truth frame")

    acc = MetricAccumulator()
    for pred, gt in zip(preds, gts):
        acc.add_frame(*_match_frame(pred, gt, width_threshold_px))
    if acc.gt_points == 0:
        raise UndefinedMetricError("ground truth contains no labelled points in any frame")
    return acc.accuracy()


def classification_accuracy(
    pred_classes: Sequence[Sequence[int | None]],
    gt_classes: Sequence[Sequence[int | None]],
    gt_presence: Sequence[Sequence[bool]],
) -> float:
    """Fraction of present ground-truth lanes whose predicted super-class matches.

    Inputs are per-frame, per-lane super-class ids. Only lanes flagged present
    in the ground truth are scored; a None prediction for a present lane
    counts as wrong.
    """
    matched = 0
    present = 0
    for pred_f, gt_f, pres_f in zip(pred_classes, gt_classes, gt_presence, strict=True):
        for pred_c, gt_c, pres in zip(pred_f, gt_f, pres_f, strict=True):
            if not pres:
                continue
            if gt_c is None:
                raise ValidationError("present ground-truth lane is missing a class label")
            present += 1
            if pred_c is not None and int(pred_c) == int(gt_c):
                matched += 1
    if present == 0:
        raise UndefinedMetricError("no present ground-truth lanes to score")
    return matched / present
