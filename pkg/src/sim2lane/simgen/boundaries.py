"""Lane boundary geometry from lane-center waypoints.

A lane is described by an ordered polyline of 3D center points; its painted
boundaries sit half a lane width to each side, perpendicular to the local
heading in the ground plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass
class LaneBoundarySample:
    """Left/right boundary polylines for one lane of width ``width_m``."""

    left: np.ndarray   # (N, 3)
    right: np.ndarray  # (N, 3)
    width_m: float
    raw_class_id: int


def headings_from_polyline(centers: np.ndarray) -> np.ndarray:
    """Ground-plane heading (yaw, radians) at each polyline vertex.

    Interior vertices average the directions of their two segments; duplicate
    consecutive points leave the heading undefined and raise.
    """
    centers = np.asarray(centers, dtype=float)
    deltas = np.diff(centers[:, :2], axis=0)
    norms = np.linalg.norm(deltas, axis=1)
    if np.any(norms < 1e-12):
        raise ValidationError("duplicate consecutive waypoints leave the heading undefined")
    seg_yaw = np.arctan2(deltas[:, 1], deltas[:, 0])
    yaw = np.empty(centers.shape[0])
    yaw[0] = seg_yaw[0]
    yaw[-1] = seg_yaw[-1]
    for i in range(1, centers.shape[0] - 1):
        # Average unit vectors, not angles, to stay wrap-around safe.
        v = np.array([np.cos(seg_yaw[i - 1]) + np.cos(seg_yaw[i]), np.sin(seg_yaw[i - 1]) + np.sin(seg_yaw[i])])
        yaw[i] = np.arctan2(v[1], v[0])
    return yaw


def offset_polyline(centers: np.ndarray, lateral_m: float, headings: np.ndarray | None = None) -> np.ndarray:
    """Shift a polyline perpendicular to its heading; positive is to the left."""
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != 3 or centers.shape[0] < 2:
        raise ValidationError("centers must be an (N>=2, 3) polyline")
    if headings is None:
        yaw = headings_from_polyline(centers)
    else:
        yaw = np.asarray(headings, dtype=float)
        if yaw.shape != (centers.shape[0],):
            raise ValidationError("need one heading per waypoint")
    # Left of travel direction: heading rotated +90 degrees about +z.
    left_dir = np.stack([-np.sin(yaw), np.cos(yaw), np.zeros_like(yaw)], axis=1)
    return centers + lateral_m * left_dir


def lane_boundaries_from_waypoints(
    centers: np.ndarray,
    width_m: float,
    headings: np.ndarray | None = None,
    raw_class_id: int = 0,
) -> LaneBoundarySample:
    """Offset lane-center waypoints by half the lane width to each side.

    ``headings`` are ground-plane yaw angles (radians); when omitted they are
    derived from the polyline itself.
    """
    if width_m <= 0:
        raise ValidationError("lane width must be positive")
    return LaneBoundarySample(
        left=offset_polyline(centers, width_m / 2.0, headings),
        right=offset_polyline(centers, -width_m / 2.0, headings),
        width_m=width_m,
        raw_class_id=raw_class_id,
    )
