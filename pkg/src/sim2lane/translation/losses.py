"""Adversarial, perceptual and reconstruction losses for image translation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
import torch.nn as nn

from ..errors import ValidationError


@dataclass(frozen=True)
class GenLossWeights:
    """Weights for the encoder-generator objective.

    recon/cyc_recon weigh image reconstruction, lsgan the generator's
    adversarial term, task/cyc_task the supervised losses computed on latent
    codes, perceptual the feature-matching term and adv_fea the feature
    discriminator's confusion term. content/style apply only in
    content-style mode.
    """

    recon: float = 10.0
    cyc_recon: float = 10.0
    lsgan: float = 1.0
    task: float = 1.0
    cyc_task: float = 1.0
    perceptual: float = 1.0
    adv_fea: float = 0.1
    content: float = 1.0
    style: float = 1.0

    def __post_init__(self):
        for name in ("recon", "cyc_recon", "lsgan", "task", "cyc_task", "perceptual", "adv_fea", "content", "style"):
            if getattr(self, name) < 0:
                raise ValidationError(f"loss weight {name} must be nonnegative")


def _flatten_scores(outputs: torch.Tensor | Sequence[torch.Tensor]) -> torch.Tensor:
    if isinstance(outputs, torch.Tensor):
        return outputs.reshape(-1)
    return torch.cat([o.reshape(-1) for o in outputs])


def lsgan_losses(
    scores_on_data: torch.Tensor | Sequence[torch.Tensor],
    scores_on_generated: torch.Tensor | Sequence[torch.Tensor],
) -> tuple[torch.Tensor, torch.Tensor]:
    """Least-squares adversarial pair.

    loss_D = E[(D(x) - 1)^2] + E[D(G(z))^2], loss_G = E[(D(G(z)) - 1)^2];
    expectations are means over every score element (all scales pooled).
    """
    real = _flatten_scores(scores_on_data)
    fake = _flatten_scores(scores_on_generated)
    loss_d = ((real - 1.0) ** 2).mean() + (fake**2).mean()
    loss_g = ((fake - 1.0) ** 2).mean()
    return loss_d, loss_g


def instance_normalize(features: torch.Tensor, eps: float = 1e-5) -> torch.Tensor:
    """Per-sample, per-channel normalization over spatial dims."""
    if features.dim() != 4:
        raise ValidationError("expected (B, C, H, W) feature maps")
    mean = features.mean(dim=(2, 3), keepdim=True)
    var = features.var(dim=(2, 3), keepdim=True, unbiased=False)
    return (features - mean) / torch.sqrt(var + eps)


def perceptual_loss(x: torch.Tensor, x_translated: torch.Tensor, feature_extractor: nn.Module) -> torch.Tensor:
    """MSE between instance-normalized features of the two images."""
    fa = instance_normalize(feature_extractor(x))
    fb = instance_normalize(feature_extractor(x_translated))
    return ((fa - fb) ** 2).mean()


def l1_recon(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Mean absolute error."""
    return (a - b).abs().mean()
