from .augment import AugmentationParams, apply_geometric, augment
from .dataset import DatasetManifest, DatasetSplits, FrameDataset, FrameSample, load_dataset, write_manifest
from .labels import LabelRecord, read_label_file, write_label_file
from .streams import labelled_batches, resample_indices, resample_subset, unpaired_batches

__all__ = [
    "AugmentationParams",
    "DatasetManifest",
    "DatasetSplits",
    "FrameDataset",
    "FrameSample",
    "LabelRecord",
    "apply_geometric",
    "augment",
    "labelled_batches",
    "load_dataset",
    "read_label_file",
    "resample_indices",
    "resample_subset",
    "unpaired_batches",
    "write_label_file",
    "write_manifest",
]
