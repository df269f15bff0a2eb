"""Row-anchor lane detector: compact residual backbone plus three heads.

The location head classifies each (lane, anchor) into one of w+1 cells, the
class head predicts a per-lane super-class, and an auxiliary segmentation
head (training only) predicts a per-pixel lane-instance map at 1/8 scale.
The backbone is swappable for a latent-feature stem so the same heads serve
both image inputs and shared-latent-space inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ValidationError
from ..rowanchor import RowAnchorConfig


@dataclass(frozen=True)
class DetectorConfig:
    """Backbone/head sizing; defaults are desk-scale trainable on CPU."""

    in_channels: int = 3
    stem_channels: int = 32
    stage_channels: tuple[int, ...] = (64, 128, 256)
    head_channels: int = 8
    hidden_dim: int = 512
    num_classes: int = 2
    input_stride: int = 1  # spatial stride already applied to the input (latents > 1)
    normalize_mean: tuple[float, float, float] = (0.5, 0.5, 0.5)
    normalize_std: tuple[float, float, float] = (0.5, 0.5, 0.5)


class ResidualBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.skip = None
        if stride != 1 or in_ch != out_ch:
            self.skip = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )

    def forward(self, x):
        identity = x if self.skip is None else self.skip(x)
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return F.relu(out + identity)


@dataclass
class DetectorOutput:
    """Raw head outputs for a batch.

    location_logits: (B, C, h, w+1); class_logits: (B, C, num_classes);
    seg_logits: (B, C+1, H/8, W/8) or None outside training.
    """

    location_logits: torch.Tensor
    class_logits: torch.Tensor
    seg_logits: torch.Tensor | None = None

    def location_probs(self) -> torch.Tensor:
        return torch.softmax(self.location_logits, dim=-1)


class RowAnchorDetector(nn.Module):
    """Backbone + location/class/segmentation heads on a fixed input size."""

    def __init__(self, cfg: RowAnchorConfig, det_cfg: DetectorConfig = DetectorConfig()):
        super().__init__()
        self.cfg = cfg
        self.det_cfg = det_cfg
        h_in, w_in = cfg.input_size
        stride = det_cfg.input_stride
        if h_in % 8 or w_in % 8:
            raise ValidationError("input size must be divisible by 8 for the segmentation head")

        # Downsampling plan: reach /8 (in image coordinates) for the seg
        # feature and /16 for the head feature, whatever stride the input
        # already carries.
        stages = []
        self.stem = nn.Sequential(
            nn.Conv2d(det_cfg.in_channels, det_cfg.stem_channels, 3, stride=2, padding=1, bias=False),
            nn.BatchNorm2d(det_cfg.stem_channels),
            nn.ReLU(inplace=True),
        )
        current = stride * 2
        ch = det_cfg.stem_channels
        self._seg_tap = None  # stage index producing the /8 feature; None = stem output
        seg_channels = ch if current == 8 else None
        for out_ch in det_cfg.stage_channels:
            if current < 16:
                stages.append(ResidualBlock(ch, out_ch, stride=2))
                current *= 2
            else:
                stages.append(ResidualBlock(ch, out_ch, stride=1))
            ch = out_ch
            if current == 8 and self._seg_tap is None:
                self._seg_tap = len(stages) - 1
                seg_channels = out_ch
        if current != 16 or seg_channels is None:
            raise ValidationError(
                f"backbone cannot reach strides 8 and 16 from input stride {stride} "
                f"with {len(det_cfg.stage_channels)} stages"
            )
        self.stages = nn.ModuleList(stages)

        feat_h, feat_w = h_in // 16, w_in // 16
        self.pool = nn.Conv2d(ch, det_cfg.head_channels, 1)
        flat = det_cfg.head_channels * feat_h * feat_w
        self.fc_shared = nn.Linear(flat, det_cfg.hidden_dim)
        self.fc_location = nn.Linear(
            det_cfg.hidden_dim, cfg.num_lanes * cfg.num_anchors * (cfg.num_cells + 1)
        )
        # The class branch consumes the identical flattened feature vector.
        self.fc_class = nn.Linear(det_cfg.hidden_dim, cfg.num_lanes * det_cfg.num_classes)

        self.seg_head = nn.Sequential(
            nn.Conv2d(seg_channels + ch, 64, 3, padding=1, bias=False),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.Conv2d(64, cfg.num_lanes + 1, 1),
        )

    def expected_input_hw(self) -> tuple[int, int]:
        s = self.det_cfg.input_stride
        return self.cfg.input_size[0] // s, self.cfg.input_size[1] // s

    def backbone_features(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (head feature at /16, seg feature at /8)."""
        exp_h, exp_w = self.expected_input_hw()
        if x.dim() != 4 or x.shape[1] != self.det_cfg.in_channels or x.shape[2:] != (exp_h, exp_w):
            raise ValidationError(
                f"expected input (B, {self.det_cfg.in_channels}, {exp_h}, {exp_w}), got {tuple(x.shape)}"
            )
        out = self.stem(x)
        seg_feat = out
        for i, stage in enumerate(self.stages):
            out = stage(out)
            if i == self._seg_tap:
                seg_feat = out
        return out, seg_feat

    def heads_from_features(
        self, feat: torch.Tensor, seg_feat: torch.Tensor, with_seg: bool = True
    ) -> DetectorOutput:
        b = feat.shape[0]
        pooled = self.pool(feat).flatten(1)
        shared = F.relu(self.fc_shared(pooled))
        loc = self.fc_location(shared).view(
            b, self.cfg.num_lanes, self.cfg.num_anchors, self.cfg.num_cells + 1
        )
        cls = self.fc_class(shared).view(b, self.cfg.num_lanes, self.det_cfg.num_classes)
        seg = None
        if with_seg:
            up = F.interpolate(feat, size=seg_feat.shape[2:], mode="nearest")
            seg = self.seg_head(torch.cat([seg_feat, up], dim=1))
        return DetectorOutput(location_logits=loc, class_logits=cls, seg_logits=seg)

    def forward(self, x: torch.Tensor, with_seg: bool = True) -> DetectorOutput:
        feat, seg_feat = self.backbone_features(x)
        return self.heads_from_features(feat, seg_feat, with_seg=with_seg)

    def normalize_image(self, image: np.ndarray) -> torch.Tensor:
        """HWC uint8 RGB -> normalized CHW float tensor."""
        t = torch.from_numpy(np.ascontiguousarray(image)).float().permute(2, 0, 1) / 255.0
        mean = torch.tensor(self.det_cfg.normalize_mean).view(-1, 1, 1)
        std = torch.tensor(self.det_cfg.normalize_std).view(-1, 1, 1)
        return (t - mean) / std


class FeatureDiscriminator(nn.Module):
    """Small conv classifier over encoder features -> domain probability in (0, 1)."""

    def __init__(self, in_channels: int, hidden: int = 64):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(in_channels, hidden, 3, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(hidden, hidden, 3, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
            nn.Linear(hidden, 1),
        )

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """Per-image probability that the features came from the sim domain."""
        return torch.sigmoid(self.net(features)).squeeze(-1)
