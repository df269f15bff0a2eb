"""Encoder, generator and discriminator networks for unpaired image translation.

Encoders use two stride-2 downsampling convolutions followed by residual
blocks; generators mirror them with upsampling convolutions and a tanh
output. The shared-latent variant uses a single content code; the
content/style variant adds a style encoder (global vector) and a decoder
conditioned on style through adaptive instance normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ConfigurationError

LATENT_STRIDE = 4  # two stride-2 downsamples


@dataclass(frozen=True)
class TranslationNetConfig:
    """Sizing knobs; defaults suit 64x64 toy runs on CPU."""

    image_channels: int = 3
    base_channels: int = 16
    num_res_blocks: int = 2
    style_dim: int = 8
    disc_base_channels: int = 16
    disc_layers: int = 3
    disc_scales: int = 3


class InstanceResBlock(nn.Module):
    def __init__(self, ch: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(ch, ch, 3, padding=1),
            nn.InstanceNorm2d(ch),
            nn.ReLU(inplace=True),
            nn.Conv2d(ch, ch, 3, padding=1),
            nn.InstanceNorm2d(ch),
        )

    def forward(self, x):
        return x + self.block(x)


class ContentEncoder(nn.Module):
    def __init__(self, cfg: TranslationNetConfig):
        super().__init__()
        ch = cfg.base_channels
        layers: list[nn.Module] = [
            nn.Conv2d(cfg.image_channels, ch, 7, padding=3),
            nn.InstanceNorm2d(ch),
            nn.ReLU(inplace=True),
        ]
        for _ in range(2):
            layers += [
                nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
                nn.InstanceNorm2d(ch * 2),
                nn.ReLU(inplace=True),
            ]
            ch *= 2
        layers += [InstanceResBlock(ch) for _ in range(cfg.num_res_blocks)]
        self.model = nn.Sequential(*layers)
        self.out_channels = ch

    def forward(self, x):
        return self.model(x)


class StyleEncoder(nn.Module):
    def __init__(self, cfg: TranslationNetConfig):
        super().__init__()
        ch = cfg.base_channels
        layers: list[nn.Module] = [
            nn.Conv2d(cfg.image_channels, ch, 7, padding=3),
            nn.ReLU(inplace=True),
        ]
        for _ in range(3):
            layers += [nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1), nn.ReLU(inplace=True)]
            ch *= 2
        layers += [nn.AdaptiveAvgPool2d(1), nn.Conv2d(ch, cfg.style_dim, 1)]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        return self.model(x).flatten(1)


class AdaptiveInstanceNorm(nn.Module):
    """Instance norm whose scale/shift come from a style vector."""

    def __init__(self, ch: int, style_dim: int):
        super().__init__()
        self.norm = nn.InstanceNorm2d(ch, affine=False)
        self.affine = nn.Linear(style_dim, ch * 2)

    def forward(self, x, style):
        gamma, beta = self.affine(style).chunk(2, dim=1)
        out = self.norm(x)
        return out * (1 + gamma.unsqueeze(-1).unsqueeze(-1)) + beta.unsqueeze(-1).unsqueeze(-1)


class StyledResBlock(nn.Module):
    def __init__(self, ch: int, style_dim: int):
        super().__init__()
        self.conv1 = nn.Conv2d(ch, ch, 3, padding=1)
        self.adain1 = AdaptiveInstanceNorm(ch, style_dim)
        self.conv2 = nn.Conv2d(ch, ch, 3, padding=1)
        self.adain2 = AdaptiveInstanceNorm(ch, style_dim)

    def forward(self, x, style):
        out = F.relu(self.adain1(self.conv1(x), style))
        out = self.adain2(self.conv2(out), style)
        return x + out


class Generator(nn.Module):
    """Mirrored decoder: residual blocks then two upsampling stages, tanh output.

    With ``style_dim`` > 0 the residual blocks are conditioned on a style
    vector; otherwise the generator is purely content driven.
    """

    def __init__(self, cfg: TranslationNetConfig, styled: bool):
        super().__init__()
        ch = cfg.base_channels * 4
        self.styled = styled
        if styled:
            self.res_blocks = nn.ModuleList(
                [StyledResBlock(ch, cfg.style_dim) for _ in range(cfg.num_res_blocks)]
            )
        else:
            self.res_blocks = nn.ModuleList([InstanceResBlock(ch) for _ in range(cfg.num_res_blocks)])
        up = []
        for _ in range(2):
            up += [
                nn.Upsample(scale_factor=2, mode="nearest"),
                nn.Conv2d(ch, ch // 2, 5, padding=2),
                nn.InstanceNorm2d(ch // 2),
                nn.ReLU(inplace=True),
            ]
            ch //= 2
        up += [nn.Conv2d(ch, cfg.image_channels, 7, padding=3), nn.Tanh()]
        self.up = nn.Sequential(*up)

    def forward(self, z: torch.Tensor, style: torch.Tensor | None = None) -> torch.Tensor:
        out = z
        for block in self.res_blocks:
            out = block(out, style) if self.styled else block(out)
        return self.up(out)


class PatchDiscriminator(nn.Module):
    def __init__(self, cfg: TranslationNetConfig):
        super().__init__()
        ch = cfg.disc_base_channels
        layers: list[nn.Module] = [
            nn.Conv2d(cfg.image_channels, ch, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        for _ in range(cfg.disc_layers - 1):
            layers += [
                nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            ch *= 2
        layers += [nn.Conv2d(ch, 1, 1)]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        return self.model(x)


class MultiScaleDiscriminator(nn.Module):
    """Patch discriminators applied to progressively downsampled inputs."""

    def __init__(self, cfg: TranslationNetConfig):
        super().__init__()
        self.scales = nn.ModuleList([PatchDiscriminator(cfg) for _ in range(cfg.disc_scales)])
        self.downsample = nn.AvgPool2d(3, stride=2, padding=1, count_include_pad=False)

    def forward(self, x) -> list[torch.Tensor]:
        outputs = []
        for disc in self.scales:
            outputs.append(disc(x))
            x = self.downsample(x)
        return outputs


def conv_classifier_16(channels: int = 3, width: int = 64, seed: int = 0) -> nn.Module:
    """Frozen 16-layer convolutional classifier trunk for feature comparison.

    Mirrors the classic 13-conv + 3-fc layout up to the last convolution
    (pre-pooling). Weights are randomly initialized from ``seed`` and frozen,
    so the feature metric is fixed without downloading pretrained weights.
    """
    plan = [width, width, "P", width * 2, width * 2, "P", width * 4, width * 4, width * 4, "P",
            width * 8, width * 8, width * 8, "P", width * 8, width * 8, width * 8]
    gen = torch.Generator().manual_seed(seed)
    layers: list[nn.Module] = []
    ch = channels
    for item in plan:
        if item == "P":
            layers.append(nn.MaxPool2d(2))
            continue
        conv = nn.Conv2d(ch, int(item), 3, padding=1)
        with torch.no_grad():
            conv.weight.copy_(torch.randn(conv.weight.shape, generator=gen) * 0.05)
            conv.bias.zero_()
        layers += [conv, nn.ReLU(inplace=True)]
        ch = int(item)
    model = nn.Sequential(*layers)
    for p in model.parameters():
        p.requires_grad_(False)
    model.eval()
    return model


def build_feature_extractor(kind: str = "random", seed: int = 0, width: int = 32) -> nn.Module:
    """Feature extractor for the perceptual loss.

    ``random``: frozen randomly-initialized classifier trunk (no downloads).
    ``vgg16``: torchvision's pretrained VGG16 conv trunk, if installed and
    its weights are available locally.
    """
    if kind == "random":
        return conv_classifier_16(seed=seed, width=width)
    if kind == "vgg16":
        try:
            from torchvision.models import vgg16

            model = vgg16(weights="IMAGENET1K_V1").features[:-1]  # up to last conv+relu
        except Exception as exc:
            raise ConfigurationError(f"pretrained feature extractor unavailable: {exc}") from exc
        for p in model.parameters():
            p.requires_grad_(False)
        model.eval()
        return model
    raise ConfigurationError(f"unknown feature extractor kind {kind!r}")
