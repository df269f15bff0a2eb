"""Prediction overlays: lane points drawn on the frame, colored by class.

Continuous/solid lanes draw in red, dashed lanes in green; absent lanes draw
nothing. A small banner along the top edge carries run metadata.
"""

from __future__ import annotations

import cv2
import numpy as np

from ..laneclasses import SuperClass
from ..rowanchor import LanePointLabel

COLOR_CONTINUOUS = (255, 0, 0)  # red (RGB)
COLOR_DASHED = (0, 255, 0)      # green
COLOR_UNKNOWN = (255, 255, 0)
BANNER_HEIGHT = 18
POINT_RADIUS = 3


def class_color(super_class: int | SuperClass | None) -> tuple[int, int, int]:
    if super_class is None:
        return COLOR_UNKNOWN
    return COLOR_DASHED if int(super_class) == int(SuperClass.DASHED) else COLOR_CONTINUOUS


def visualize(
    frame: np.ndarray,
    prediction: LanePointLabel,
    classes: list[int | None] | None = None,
    banner: str = "",
) -> np.ndarray:
    """Annotated copy of the frame; the input array is never touched."""
    out = frame.copy()
    classes = classes if classes is not None else [None] * prediction.num_lanes
    for i in range(prediction.num_lanes):
        if not prediction.presence[i]:
            continue
        color = class_color(classes[i] if i < len(classes) else None)
        for row, x in prediction.present_points(i):
            center = (int(round(x)), int(round(row)))
            cv2.circle(out, center, POINT_RADIUS, color, thickness=-1)
    cv2.rectangle(out, (0, 0), (out.shape[1], BANNER_HEIGHT), (0, 0, 0), thickness=-1)
    if banner:
        cv2.putText(
            out, banner, (4, BANNER_HEIGHT - 5), cv2.FONT_HERSHEY_SIMPLEX, 0.4,
            (255, 255, 255), 1, cv2.LINE_AA,
        )
    return out
