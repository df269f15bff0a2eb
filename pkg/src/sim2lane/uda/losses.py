"""Feature-adversarial losses and the combined encoder-generator objective.

Sign convention: :func:`adv_fea_losses` returns the two log-likelihood sums
as written for maximization — the discriminator wants loss_D large (sim
scored 1, real scored 0) and the encoder wants loss_G large (labels
inverted). Training minimizes their negations; the encoder-generator total
therefore receives ``-loss_G`` as its feature-adversarial component.
"""

from __future__ import annotations

import logging

import torch

from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

SCORE_EPS = 1e-7

UNIT_COMPONENTS = ("recon", "cyc_recon", "lsgan_g", "task", "cyc_task", "perceptual")
MUNIT_EXTRA = ("recon_content", "recon_style")


def clamp_scores(scores: torch.Tensor, eps: float = SCORE_EPS) -> torch.Tensor:
    """Keep probabilities strictly inside (0, 1) so the logs stay finite."""
    if bool((scores <= 0).any()) or bool((scores >= 1).any()):
        logger.debug("clamping saturated discriminator scores into (%g, 1-%g)", eps, eps)
    return scores.clamp(eps, 1.0 - eps)


def adv_fea_losses(scores_real: torch.Tensor, scores_sim: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Maximization objectives for the feature discriminator and the encoder.

    loss_D = E[log(1 - D(E(x_real)))] + E[log D(E(x_sim))]
    loss_G = E[log D(E(x_real))] + E[log(1 - D(E(x_sim)))]
    """
    real = clamp_scores(scores_real)
    sim = clamp_scores(scores_sim)
    loss_d = torch.log(1.0 - real).mean() + torch.log(sim).mean()
    loss_g = torch.log(real).mean() + torch.log(1.0 - sim).mean()
    return loss_d, loss_g


def total_generative_loss(
    components: dict[str, torch.Tensor | float],
    weights,
    mode: str = "unit",
    with_feature_disc: bool = False,
):
    """Weighted encoder-generator total.

    Components must include recon, cyc_recon, lsgan_g, task, cyc_task and
    perceptual; content-style mode adds recon_content and recon_style, and
    ``with_feature_disc`` adds adv_fea_g (already in minimization form).
    """
    required = list(UNIT_COMPONENTS)
    if mode == "munit":
        required += list(MUNIT_EXTRA)
    elif mode != "unit":
        raise ConfigurationError(f"mode must be 'unit' or 'munit', got {mode!r}")
    if with_feature_disc:
        required.append("adv_fea_g")
    missing = [k for k in required if k not in components]
    if missing:
        raise ConfigurationError(f"missing loss components for mode {mode}: {missing}")

    total = (
        weights.recon * components["recon"]
        + weights.cyc_recon * components["cyc_recon"]
        + weights.lsgan * components["lsgan_g"]
        + weights.task * components["task"]
        + weights.cyc_task * components["cyc_task"]
        + weights.perceptual * components["perceptual"]
    )
    if mode == "munit":
        total = total + weights.content * components["recon_content"] + weights.style * components["recon_style"]
    if with_feature_disc:
        total = total + weights.adv_fea * components["adv_fea_g"]
    return total
