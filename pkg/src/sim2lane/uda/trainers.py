"""Per-strategy training steps.

Three trainers cover the strategy matrix: supervised (direct transfer,
translated two-stage second phase, and the real-data upper bound), the
feature-discriminator approach on the detector backbone, and the joint
generative loop (translation networks plus latent-space detector, with an
optional feature discriminator on the content codes).

Every trainer exposes discrete step methods so tests can drive and inspect
single updates; each holds its own optimizers and applies the shared
learning-rate schedule before every update.
"""

from __future__ import annotations

from typing import Sequence

import cv2
import numpy as np
import torch

from ..data.dataset import FrameSample
from ..detector.losses import TaskLossWeights, task_loss
from ..detector.model import FeatureDiscriminator, RowAnchorDetector
from ..detector.targets import DetectorBatch, build_batch
from ..laneclasses import LaneClassMapping
from ..translation.losses import GenLossWeights, lsgan_losses, perceptual_loss
from ..translation.state import TranslationState, image_to_tensor
from .losses import adv_fea_losses, total_generative_loss
from .schedule import LrSchedule, lr_at

ADAM_BETAS = (0.9, 0.999)


def set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def _mean_scalar(values: dict[str, torch.Tensor]) -> dict[str, float]:
    return {k: float(v.detach()) if isinstance(v, torch.Tensor) else float(v) for k, v in values.items()}


class SupervisedTrainer:
    """Task-loss training of the image detector on one labelled dataset."""

    def __init__(
        self,
        detector: RowAnchorDetector,
        weights: TaskLossWeights,
        schedule: LrSchedule,
        mapping: LaneClassMapping | None = None,
    ):
        self.detector = detector
        self.weights = weights
        self.schedule = schedule
        self.mapping = mapping or LaneClassMapping()
        self.optimizer = torch.optim.Adam(detector.parameters(), lr=schedule.peak, betas=ADAM_BETAS)
        self.step_index = 0

    def step(self, samples: Sequence[FrameSample]) -> dict[str, float]:
        self.detector.train()
        batch = build_batch(samples, self.detector, self.mapping)
        lr = lr_at(self.step_index, self.schedule)
        set_lr(self.optimizer, lr)
        out = self.detector(batch.images, with_seg=self.weights.beta > 0)
        probs = out.location_probs()
        total, parts = task_loss(
            probs,
            batch.location_targets,
            out.seg_logits,
            batch.seg_targets if self.weights.beta > 0 else None,
            out.class_logits,
            batch.class_targets,
            batch.presence,
            self.weights,
        )
        total = total / len(batch)
        self.optimizer.zero_grad()
        total.backward()
        self.optimizer.step()
        self.step_index += 1
        parts["task"] = float(total.detach())
        parts["lr"] = lr
        return parts


class AdaTrainer:
    """Feature-discriminator adaptation on the detector backbone.

    The discriminator trains on detached backbone features of both domains;
    the detector trains on the task loss plus the weighted confusion term.
    """

    def __init__(
        self,
        detector: RowAnchorDetector,
        weights: TaskLossWeights,
        gen_weights: GenLossWeights,
        detector_schedule: LrSchedule,
        disc_schedule: LrSchedule,
        mapping: LaneClassMapping | None = None,
        disc_hidden: int = 64,
    ):
        self.detector = detector
        self.weights = weights
        self.gen_weights = gen_weights
        self.detector_schedule = detector_schedule
        self.disc_schedule = disc_schedule
        self.mapping = mapping or LaneClassMapping()
        feat_channels = detector.det_cfg.stage_channels[-1]
        self.feature_disc = FeatureDiscriminator(feat_channels, hidden=disc_hidden)
        self.detector_opt = torch.optim.Adam(
            detector.parameters(), lr=detector_schedule.peak, betas=ADAM_BETAS
        )
        self.disc_opt = torch.optim.Adam(
            self.feature_disc.parameters(), lr=disc_schedule.peak, betas=ADAM_BETAS
        )
        self.step_index = 0

    def _images(self, samples: Sequence[FrameSample]) -> torch.Tensor:
        h_in, w_in = self.detector.cfg.input_size
        tensors = []
        for s in samples:
            img = s.image
            if img.shape[:2] != (h_in, w_in):
                img = cv2.resize(img, (w_in, h_in), interpolation=cv2.INTER_LINEAR)
            tensors.append(self.detector.normalize_image(img))
        return torch.stack(tensors)

    def discriminator_step(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> dict[str, float]:
        """Update only the feature discriminator; detector gets no gradient."""
        self.detector.train()
        set_lr(self.disc_opt, lr_at(self.step_index, self.disc_schedule))
        with torch.no_grad():
            feat_sim = self.detector.backbone_features(self._images(sim))[0]
            feat_real = self.detector.backbone_features(self._images(real))[0]
        scores_sim = self.feature_disc(feat_sim)
        scores_real = self.feature_disc(feat_real)
        loss_d_max, _ = adv_fea_losses(scores_real, scores_sim)
        loss = -loss_d_max
        self.disc_opt.zero_grad()
        loss.backward()
        self.disc_opt.step()
        return {"adv_fea_d": float(loss_d_max.detach()), "disc_loss": float(loss.detach())}

    def detector_step(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> dict[str, float]:
        """Task loss on sim plus the confusion term on both domains."""
        self.detector.train()
        lr = lr_at(self.step_index, self.detector_schedule)
        set_lr(self.detector_opt, lr)
        batch = build_batch(sim, self.detector, self.mapping)
        feat_sim, seg_feat = self.detector.backbone_features(batch.images)
        out = self.detector.heads_from_features(feat_sim, seg_feat, with_seg=self.weights.beta > 0)
        probs = out.location_probs()
        total, parts = task_loss(
            probs,
            batch.location_targets,
            out.seg_logits,
            batch.seg_targets if self.weights.beta > 0 else None,
            out.class_logits,
            batch.class_targets,
            batch.presence,
            self.weights,
        )
        total = total / len(batch)
        feat_real = self.detector.backbone_features(self._images(real))[0]
        scores_sim = self.feature_disc(feat_sim)
        scores_real = self.feature_disc(feat_real)
        _, loss_g_max = adv_fea_losses(scores_real, scores_sim)
        loss = total + self.gen_weights.adv_fea * (-loss_g_max)
        self.detector_opt.zero_grad()
        loss.backward()
        self.detector_opt.step()
        self.step_index += 1
        parts.update({"task": float(total.detach()), "adv_fea_g": float(loss_g_max.detach()), "lr": lr})
        return parts

    def step(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> dict[str, float]:
        logs = self.discriminator_step(sim, real)
        logs.update(self.detector_step(sim, real))
        return logs

    @torch.no_grad()
    def discriminator_accuracy(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> float:
        """Held-out domain-classification accuracy of the feature discriminator."""
        self.detector.eval()
        feat_sim = self.detector.backbone_features(self._images(sim))[0]
        feat_real = self.detector.backbone_features(self._images(real))[0]
        pred_sim = self.feature_disc(feat_sim) > 0.5
        pred_real = self.feature_disc(feat_real) <= 0.5
        correct = int(pred_sim.sum()) + int(pred_real.sum())
        return correct / (len(sim) + len(real))


class GenerativeTrainer:
    """Joint translation (+ optional latent detector) training loop.

    Without a detector this is plain unpaired translation training (the
    two-stage first phase and the toy reconstruction runs). With a detector,
    task and cyclic-task losses feed the total objective and a feature
    discriminator on the content codes can be enabled.
    """

    def __init__(
        self,
        state: TranslationState,
        gen_weights: GenLossWeights,
        encgen_schedule: LrSchedule,
        disc_schedule: LrSchedule,
        feature_extractor: torch.nn.Module | None,
        detector: RowAnchorDetector | None = None,
        detector_schedule: LrSchedule | None = None,
        task_weights: TaskLossWeights | None = None,
        with_feature_disc: bool = False,
        mapping: LaneClassMapping | None = None,
        image_hw: tuple[int, int] | None = None,
        torch_seed: int = 0,
    ):
        self.state = state
        self.gen_weights = gen_weights
        self.encgen_schedule = encgen_schedule
        self.disc_schedule = disc_schedule
        self.feature_extractor = feature_extractor
        self.detector = detector
        self.detector_schedule = detector_schedule
        self.task_weights = task_weights or TaskLossWeights()
        self.with_feature_disc = with_feature_disc
        self.mapping = mapping or LaneClassMapping()
        self.image_hw = image_hw
        self.rng = torch.Generator().manual_seed(torch_seed)

        self.encgen_opt = torch.optim.Adam(
            list(state.generator_parameters()), lr=encgen_schedule.peak, betas=ADAM_BETAS
        )
        self.disc_opt = torch.optim.Adam(
            list(state.discriminator_parameters()), lr=disc_schedule.peak, betas=ADAM_BETAS
        )
        self.detector_opt = None
        if detector is not None:
            self.detector_opt = torch.optim.Adam(
                detector.parameters(), lr=(detector_schedule or encgen_schedule).peak, betas=ADAM_BETAS
            )
        self.feature_disc = None
        self.feature_disc_opt = None
        if with_feature_disc:
            self.feature_disc = FeatureDiscriminator(state.latent_channels)
            self.feature_disc_opt = torch.optim.Adam(
                self.feature_disc.parameters(), lr=disc_schedule.peak, betas=ADAM_BETAS
            )
        self.step_index = 0

    def _to_tensor(self, samples: Sequence[FrameSample]) -> torch.Tensor:
        tensors = []
        for s in samples:
            img = s.image
            if self.image_hw is not None and img.shape[:2] != self.image_hw:
                img = cv2.resize(img, (self.image_hw[1], self.image_hw[0]), interpolation=cv2.INTER_LINEAR)
            tensors.append(image_to_tensor(img))
        return torch.stack(tensors)

    def discriminator_step(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> dict[str, float]:
        """LSGAN update of both image discriminators (and the feature one)."""
        self.state.train()
        set_lr(self.disc_opt, lr_at(self.step_index, self.disc_schedule))
        x_sim = self._to_tensor(sim)
        x_real = self._to_tensor(real)
        with torch.no_grad():
            fake_real = self.state.translate(x_sim, "sim", "real", training=True, generator=self.rng)
            fake_sim = self.state.translate(x_real, "real", "sim", training=True, generator=self.rng)
        d_real, _ = lsgan_losses(
            self.state.discriminators["real"](x_real), self.state.discriminators["real"](fake_real)
        )
        d_sim, _ = lsgan_losses(
            self.state.discriminators["sim"](x_sim), self.state.discriminators["sim"](fake_sim)
        )
        loss = d_real + d_sim
        self.disc_opt.zero_grad()
        loss.backward()
        self.disc_opt.step()
        logs = {"lsgan_d": float(loss.detach())}

        if self.feature_disc is not None:
            set_lr(self.feature_disc_opt, lr_at(self.step_index, self.disc_schedule))
            with torch.no_grad():
                z_sim = self.state.encode(x_sim, "sim", training=True, generator=self.rng).content
                z_real = self.state.encode(x_real, "real", training=True, generator=self.rng).content
            loss_d_max, _ = adv_fea_losses(self.feature_disc(z_real), self.feature_disc(z_sim))
            fd_loss = -loss_d_max
            self.feature_disc_opt.zero_grad()
            fd_loss.backward()
            self.feature_disc_opt.step()
            logs["adv_fea_d"] = float(loss_d_max.detach())
        return logs

    def generator_step(
        self,
        sim: Sequence[FrameSample],
        real: Sequence[FrameSample],
    ) -> dict[str, float]:
        """One minimization step of the weighted encoder-generator total."""
        self.state.train()
        lr = lr_at(self.step_index, self.encgen_schedule)
        set_lr(self.encgen_opt, lr)
        if self.detector_opt is not None:
            self.detector.train()
            set_lr(self.detector_opt, lr_at(self.step_index, self.detector_schedule))

        x_sim = self._to_tensor(sim)
        x_real = self._to_tensor(real)
        recon = self.state.reconstruction_losses(x_sim, x_real, training=True, generator=self.rng)

        _, g_real = lsgan_losses(
            self.state.discriminators["real"](x_real),
            self.state.discriminators["real"](recon["translated_sim_to_real"]),
        )
        _, g_sim = lsgan_losses(
            self.state.discriminators["sim"](x_sim),
            self.state.discriminators["sim"](recon["translated_real_to_sim"]),
        )
        components: dict[str, torch.Tensor] = {
            "recon": recon["recon"],
            "cyc_recon": recon["cyc_recon"],
            "lsgan_g": g_real + g_sim,
        }
        if self.gen_weights.perceptual > 0 and self.feature_extractor is not None:
            components["perceptual"] = perceptual_loss(
                x_sim, recon["translated_sim_to_real"], self.feature_extractor
            ) + perceptual_loss(x_real, recon["translated_real_to_sim"], self.feature_extractor)
        else:
            components["perceptual"] = torch.zeros(())
        if self.state.mode == "munit":
            components["recon_content"] = recon["recon_content"]
            components["recon_style"] = recon["recon_style"]

        if self.detector is not None:
            components.update(self._task_components(sim, x_sim, recon["translated_sim_to_real"]))
        else:
            components["task"] = torch.zeros(())
            components["cyc_task"] = torch.zeros(())

        if self.feature_disc is not None:
            z_sim = self.state.encode(x_sim, "sim", training=True, generator=self.rng).content
            z_real = self.state.encode(x_real, "real", training=True, generator=self.rng).content
            _, loss_g_max = adv_fea_losses(self.feature_disc(z_real), self.feature_disc(z_sim))
            components["adv_fea_g"] = -loss_g_max

        total = total_generative_loss(
            components, self.gen_weights, mode=self.state.mode, with_feature_disc=self.feature_disc is not None
        )
        self.encgen_opt.zero_grad()
        if self.detector_opt is not None:
            self.detector_opt.zero_grad()
        total.backward()
        self.encgen_opt.step()
        if self.detector_opt is not None:
            self.detector_opt.step()

        logs = _mean_scalar(components)
        logs.update({"gen_total": float(total.detach()), "lr": lr})
        return logs

    def _task_components(
        self, sim: Sequence[FrameSample], x_sim: torch.Tensor, translated: torch.Tensor
    ) -> dict[str, torch.Tensor]:
        batch = build_batch(sim, self.detector, self.mapping)
        z_sim = self.state.encode(x_sim, "sim", training=True, generator=self.rng).content
        out = self.detector(z_sim, with_seg=self.task_weights.beta > 0)
        t_direct, _ = task_loss(
            out.location_probs(),
            batch.location_targets,
            out.seg_logits,
            batch.seg_targets if self.task_weights.beta > 0 else None,
            out.class_logits,
            batch.class_targets,
            batch.presence,
            self.task_weights,
        )
        z_cyc = self.state.encode(translated, "real", training=True, generator=self.rng).content
        out_cyc = self.detector(z_cyc, with_seg=self.task_weights.beta > 0)
        t_cyc, _ = task_loss(
            out_cyc.location_probs(),
            batch.location_targets,
            out_cyc.seg_logits,
            batch.seg_targets if self.task_weights.beta > 0 else None,
            out_cyc.class_logits,
            batch.class_targets,
            batch.presence,
            self.task_weights,
        )
        n = len(batch)
        return {"task": t_direct / n, "cyc_task": t_cyc / n}

    def step(self, sim: Sequence[FrameSample], real: Sequence[FrameSample]) -> dict[str, float]:
        logs = self.discriminator_step(sim, real)
        logs.update(self.generator_step(sim, real))
        self.step_index += 1
        return logs
