"""Supervised task losses for the row-anchor detector.

Conventions follow the head outputs: the location and continuity losses act
on softmax-normalized probability volumes, while the segmentation and
classification losses take raw logits. The combined task loss is

    task = location + alpha * continuity + beta * segmentation + gamma * classification
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..errors import ValidationError


@dataclass(frozen=True)
class TaskLossWeights:
    """alpha scales the continuity loss, beta segmentation, gamma classification."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.1

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValidationError("task loss weights must be nonnegative")


def loc_loss(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Sum over lanes and anchors of cross-entropy against the target cell.

    ``probs``: (..., C, h, w+1) softmax-normalized; ``targets``: (..., C, h)
    integer cell indices in [0, w].
    """
    num_cells_plus_1 = probs.shape[-1]
    if targets.min() < 0 or targets.max() >= num_cells_plus_1:
        raise ValidationError(f"targets must lie in [0, {num_cells_plus_1 - 1}]")
    picked = torch.gather(probs, -1, targets.unsqueeze(-1)).squeeze(-1)
    return -torch.log(picked).sum()


def sim_loss(probs: torch.Tensor) -> torch.Tensor:
    """L1 distance between classification vectors of adjacent row anchors, summed."""
    diff = probs[..., :-1, :] - probs[..., 1:, :]
    return diff.abs().sum()


def seg_loss(seg_logits: torch.Tensor, seg_target: torch.Tensor) -> torch.Tensor:
    """Mean per-pixel cross-entropy over the lane-instance map."""
    num_classes = seg_logits.shape[-3]
    if seg_target.min() < 0 or seg_target.max() >= num_classes:
        raise ValidationError(f"segmentation target classes must lie in [0, {num_classes - 1}]")
    if seg_logits.dim() == 3:
        seg_logits = seg_logits.unsqueeze(0)
        seg_target = seg_target.unsqueeze(0)
    return F.cross_entropy(seg_logits, seg_target, reduction="mean")


def cls_loss(class_logits: torch.Tensor, class_targets: torch.Tensor, presence: torch.Tensor) -> torch.Tensor:
    """Cross-entropy summed over present lanes; absent lanes contribute nothing."""
    mask = presence.bool()
    if not mask.any():
        return class_logits.sum() * 0.0
    logits = class_logits[mask]
    targets = class_targets[mask]
    return F.cross_entropy(logits, targets, reduction="sum")


def task_loss(
    location_probs: torch.Tensor,
    location_targets: torch.Tensor,
    seg_logits: torch.Tensor | None,
    seg_targets: torch.Tensor | None,
    class_logits: torch.Tensor,
    class_targets: torch.Tensor,
    presence: torch.Tensor,
    weights: TaskLossWeights = TaskLossWeights(),
) -> tuple[torch.Tensor, dict[str, float]]:
    """Weighted sum of the four components; also returns them for logging."""
    l_loc = loc_loss(location_probs, location_targets)
    l_sim = sim_loss(location_probs)
    if weights.beta != 0 and seg_logits is not None and seg_targets is not None:
        l_seg = seg_loss(seg_logits, seg_targets)
    else:
        l_seg = torch.zeros((), dtype=location_probs.dtype, device=location_probs.device)
    l_cls = cls_loss(class_logits, class_targets, presence)
    total = l_loc + weights.alpha * l_sim + weights.beta * l_seg + weights.gamma * l_cls
    parts = {
        "loc": float(l_loc.detach()),
        "sim": float(l_sim.detach()),
        "seg": float(l_seg.detach()),
        "cls": float(l_cls.detach()),
    }
    return total, parts
