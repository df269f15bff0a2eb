from .checkpoint import load_checkpoint, save_checkpoint
from .losses import TaskLossWeights, cls_loss, loc_loss, seg_loss, sim_loss, task_loss
from .model import DetectorConfig, DetectorOutput, FeatureDiscriminator, RowAnchorDetector
from .targets import DetectorBatch, build_batch, rasterize_segmentation

__all__ = [
    "DetectorBatch",
    "DetectorConfig",
    "DetectorOutput",
    "FeatureDiscriminator",
    "RowAnchorDetector",
    "TaskLossWeights",
    "build_batch",
    "cls_loss",
    "load_checkpoint",
    "loc_loss",
    "rasterize_segmentation",
    "save_checkpoint",
    "seg_loss",
    "sim_loss",
    "task_loss",
]
