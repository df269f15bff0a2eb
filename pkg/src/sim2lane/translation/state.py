"""Two-domain translation state: encode, decode, translate, reconstruction.

Both domains get an encoder-generator pair plus an image discriminator.
Mode ``unit`` shares a single content latent space (training-time Gaussian
noise on the code); mode ``munit`` splits the representation into a content
map and a low-dimensional style vector, translating with styles sampled from
a unit Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
import torch
import torch.nn as nn

from ..data.dataset import FrameDataset
from ..data.labels import LabelRecord, write_label_file
from ..errors import ConfigurationError, UsageError
from .losses import l1_recon
from .networks import (
    LATENT_STRIDE,
    ContentEncoder,
    Generator,
    MultiScaleDiscriminator,
    StyleEncoder,
    TranslationNetConfig,
)

DOMAINS = ("sim", "real")
MODES = ("unit", "munit")


@dataclass
class LatentCode:
    """Content feature map plus, in content-style mode, a style vector."""

    content: torch.Tensor
    style: torch.Tensor | None = None


def _check_domain(domain: str) -> str:
    if domain not in DOMAINS:
        raise ConfigurationError(f"domain must be one of {DOMAINS}, got {domain!r}")
    return domain


class TranslationState(nn.Module):
    """Encoder-generator pairs and discriminators for both domains."""

    def __init__(self, mode: str = "unit", net_cfg: TranslationNetConfig = TranslationNetConfig()):
        super().__init__()
        if mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
        self.mode = mode
        self.net_cfg = net_cfg
        self.encoders = nn.ModuleDict({d: ContentEncoder(net_cfg) for d in DOMAINS})
        self.generators = nn.ModuleDict({d: Generator(net_cfg, styled=mode == "munit") for d in DOMAINS})
        self.discriminators = nn.ModuleDict({d: MultiScaleDiscriminator(net_cfg) for d in DOMAINS})
        self.style_encoders = None
        if mode == "munit":
            self.style_encoders = nn.ModuleDict({d: StyleEncoder(net_cfg) for d in DOMAINS})

    @property
    def latent_channels(self) -> int:
        return self.encoders["sim"].out_channels

    def generator_parameters(self):
        for d in DOMAINS:
            yield from self.encoders[d].parameters()
            yield from self.generators[d].parameters()
        if self.style_encoders is not None:
            for d in DOMAINS:
                yield from self.style_encoders[d].parameters()

    def discriminator_parameters(self):
        for d in DOMAINS:
            yield from self.discriminators[d].parameters()

    def sample_style(self, batch: int, seed: int | None = None, generator: torch.Generator | None = None) -> torch.Tensor:
        if generator is None:
            generator = torch.Generator()
            generator.manual_seed(0 if seed is None else seed)
        return torch.randn(batch, self.net_cfg.style_dim, generator=generator)

    def encode(
        self,
        x: torch.Tensor,
        domain: str,
        training: bool = False,
        generator: torch.Generator | None = None,
    ) -> LatentCode:
        """Map an image to its latent code.

        In shared-latent mode a unit-Gaussian perturbation is added to the
        content code during training only; inference is deterministic.
        """
        _check_domain(domain)
        content = self.encoders[domain](x)
        style = None
        if self.mode == "munit":
            style = self.style_encoders[domain](x)
        elif training:
            noise = torch.randn(content.shape, generator=generator, dtype=content.dtype)
            content = content + noise.to(content.device)
        return LatentCode(content=content, style=style)

    def decode(self, z: LatentCode | torch.Tensor, domain: str, style: torch.Tensor | None = None) -> torch.Tensor:
        """Generate an image in ``domain`` from a latent code; range [-1, 1]."""
        _check_domain(domain)
        if isinstance(z, LatentCode):
            style = style if style is not None else z.style
            z = z.content
        if self.mode == "munit":
            if style is None:
                raise UsageError("content-style mode requires a style vector to decode")
            return self.generators[domain](z, style)
        return self.generators[domain](z)

    def translate(
        self,
        x: torch.Tensor,
        src_domain: str,
        tgt_domain: str,
        style_seed: int | None = None,
        training: bool = False,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Cross-domain translation: encode in src, generate in tgt."""
        _check_domain(src_domain)
        _check_domain(tgt_domain)
        if src_domain == tgt_domain:
            raise UsageError("translate requires distinct domains; use reconstruction instead")
        code = self.encode(x, src_domain, training=training, generator=generator)
        style = None
        if self.mode == "munit":
            style = self.sample_style(x.shape[0], seed=style_seed, generator=None if style_seed is not None else generator)
        return self.decode(code.content, tgt_domain, style=style)

    def reconstruction_losses(
        self,
        x_sim: torch.Tensor,
        x_real: torch.Tensor,
        training: bool = False,
        generator: torch.Generator | None = None,
    ) -> dict[str, torch.Tensor]:
        """Image, cyclic and (content-style mode) code reconstruction L1 terms.

        Each term sums the per-domain mean absolute errors. Also returns the
        cross-translated images so adversarial terms can reuse them.
        """
        inputs = {"sim": x_sim, "real": x_real}
        out: dict[str, torch.Tensor] = {}
        codes = {d: self.encode(inputs[d], d, training=training, generator=generator) for d in DOMAINS}

        recon = 0.0
        for d in DOMAINS:
            rec = self.decode(codes[d].content, d, style=codes[d].style)
            recon = recon + l1_recon(inputs[d], rec)
        out["recon"] = recon

        cyc = 0.0
        content_rec = 0.0
        style_rec = 0.0
        for src, tgt in (("sim", "real"), ("real", "sim")):
            if self.mode == "munit":
                style_sampled = self.sample_style(inputs[src].shape[0], generator=generator)
                translated = self.decode(codes[src].content, tgt, style=style_sampled)
                re_encoded = self.encode(translated, tgt, training=False)
                content_rec = content_rec + l1_recon(re_encoded.content, codes[src].content)
                style_rec = style_rec + l1_recon(re_encoded.style, style_sampled)
                back = self.decode(re_encoded.content, src, style=codes[src].style)
            else:
                translated = self.decode(codes[src].content, tgt)
                re_code = self.encode(translated, tgt, training=training, generator=generator)
                back = self.decode(re_code.content, src)
            cyc = cyc + l1_recon(inputs[src], back)
            out[f"translated_{src}_to_{tgt}"] = translated
        out["cyc_recon"] = cyc
        if self.mode == "munit":
            out["recon_content"] = content_rec
            out["recon_style"] = style_rec
        return out


def image_to_tensor(image: np.ndarray) -> torch.Tensor:
    """HWC uint8 RGB -> CHW float in [-1, 1]."""
    t = torch.from_numpy(np.ascontiguousarray(image)).float().permute(2, 0, 1)
    return t / 127.5 - 1.0


def tensor_to_image(t: torch.Tensor) -> np.ndarray:
    """CHW float in [-1, 1] -> HWC uint8 RGB."""
    arr = ((t.detach().clamp(-1, 1) + 1.0) * 127.5).round().to(torch.uint8)
    return arr.permute(1, 2, 0).cpu().numpy()


def pad_to_stride(image: np.ndarray, stride: int = LATENT_STRIDE) -> np.ndarray:
    """Bottom/right edge-pad so both dims divide the latent stride."""
    h, w = image.shape[:2]
    ph = (-h) % stride
    pw = (-w) % stride
    if ph == 0 and pw == 0:
        return image
    return np.pad(image, ((0, ph), (0, pw), (0, 0)), mode="edge")


def export_translated_dataset(
    state: TranslationState,
    dataset: FrameDataset,
    out_root: str | Path,
    style_seed: int = 0,
    batch_note: str = "sim_to_real",
) -> Path:
    """Translate every frame sim->real and write a dataset in the standard layout.

    Labels pass through untouched: translation preserves geometry, so the
    source lane labels remain valid for the translated images.
    """
    out_root = Path(out_root)
    (out_root / "images").mkdir(parents=True, exist_ok=True)
    records = []
    state.eval()
    with torch.no_grad():
        for i in range(len(dataset)):
            sample = dataset[i]
            image = pad_to_stride(sample.image)
            x = image_to_tensor(image).unsqueeze(0)
            y = state.translate(x, "sim", "real", style_seed=style_seed + i)
            out_img = tensor_to_image(y[0])[: sample.image.shape[0], : sample.image.shape[1]]
            rel = f"images/{i:06d}.png"
            cv2.imwrite(str(out_root / rel), cv2.cvtColor(out_img, cv2.COLOR_RGB2BGR))
            rec = dataset.records[i]
            records.append(
                LabelRecord(raw_file=rel, h_samples=rec.h_samples, lanes=rec.lanes, classes=rec.classes)
            )
    write_label_file(records, out_root / "labels.txt")
    (out_root / "provenance.txt").write_text(f"translated: {batch_note}\nsource: {dataset.root}\n")
    return out_root
