"""sim2lane: sim-to-real domain adaptation for lane detection and classification.

Core pieces: a row-anchor lane detector with supervised task losses, unpaired
image translation with shared-latent and content-style variants, feature-
discriminator adaptation, a synthetic road-scene dataset generator (simulator
backend plus a dependency-free procedural one), and an experiment harness.
"""

from .errors import (
    BackendError,
    ConfigurationError,
    LoadError,
    MappingError,
    ParseError,
    Sim2LaneError,
    UndefinedMetricError,
    UsageError,
    ValidationError,
)
from .laneclasses import LaneClassMapping, SuperClass, map_lane_class
from .metrics import MetricAccumulator, classification_accuracy, tusimple_accuracy
from .rowanchor import (
    ABSENT_X,
    LanePointLabel,
    RowAnchorConfig,
    TargetGrid,
    decode_prediction,
    encode_targets,
    row_anchor_accuracy,
)

__version__ = "0.1.0"

__all__ = [
    "ABSENT_X",
    "BackendError",
    "ConfigurationError",
    "LaneClassMapping",
    "LanePointLabel",
    "LoadError",
    "MappingError",
    "MetricAccumulator",
    "ParseError",
    "RowAnchorConfig",
    "Sim2LaneError",
    "SuperClass",
    "TargetGrid",
    "UndefinedMetricError",
    "UsageError",
    "ValidationError",
    "classification_accuracy",
    "decode_prediction",
    "encode_targets",
    "map_lane_class",
    "row_anchor_accuracy",
    "tusimple_accuracy",
    "__version__",
]
