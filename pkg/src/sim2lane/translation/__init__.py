from .losses import GenLossWeights, instance_normalize, l1_recon, lsgan_losses, perceptual_loss
from .networks import MultiScaleDiscriminator, TranslationNetConfig, build_feature_extractor
from .state import (
    LatentCode,
    TranslationState,
    export_translated_dataset,
    image_to_tensor,
    tensor_to_image,
)

__all__ = [
    "GenLossWeights",
    "LatentCode",
    "MultiScaleDiscriminator",
    "TranslationNetConfig",
    "TranslationState",
    "build_feature_extractor",
    "export_translated_dataset",
    "image_to_tensor",
    "instance_normalize",
    "l1_recon",
    "lsgan_losses",
    "perceptual_loss",
    "tensor_to_image",
]
