"""Pinhole camera, world-to-image projection, and row-anchor spline fitting.

World frame: x forward, y left, z up (vehicle convention). Camera frame:
z forward, x right, y down. Projection culls points at or behind the near
plane, then a spline in image-row parameterization is evaluated at the
requested anchor rows; rows outside the lane's projected span are absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import ValidationError
from ..rowanchor import ABSENT_X

# Axis permutation from world (x fwd, y left, z up) to camera (x right, y down, z fwd).
_WORLD_TO_CAM = np.array(
    [
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
    ]
)


def rotation_zyx(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """World-frame rotation applying roll about x, pitch about y, yaw about z."""
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class PinholeCamera:
    """Intrinsics plus pose (position and orientation of the camera in world)."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_size: tuple[int, int]  # (height, width)
    position: tuple[float, float, float] = (0.0, 0.0, 1.5)
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0
    near: float = 0.1

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError("focal lengths must be positive")

    @classmethod
    def from_fov(
        cls,
        fov_deg: float,
        image_size: tuple[int, int],
        position: tuple[float, float, float] = (0.0, 0.0, 1.5),
        pitch: float = 0.0,
        yaw: float = 0.0,
    ) -> "PinholeCamera":
        h, w = image_size
        fx = w / (2.0 * np.tan(np.radians(fov_deg) / 2.0))
        return cls(
            fx=fx, fy=fx, cx=w / 2.0, cy=h / 2.0, image_size=image_size,
            position=position, yaw=yaw, pitch=pitch,
        )

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float) - np.asarray(self.position)
        body = pts @ rotation_zyx(self.yaw, self.pitch, self.roll)  # R^T * p
        return body @ _WORLD_TO_CAM.T

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Pixel coordinates (u, v) and a visibility mask (in front of near plane)."""
        cam = self.world_to_camera(points)
        visible = cam[:, 2] > self.near
        z = np.where(visible, cam[:, 2], 1.0)
        u = self.fx * cam[:, 0] / z + self.cx
        v = self.fy * cam[:, 1] / z + self.cy
        return np.stack([u, v], axis=1), visible

    def as_dict(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "image_size": list(self.image_size), "position": list(self.position),
            "yaw": self.yaw, "pitch": self.pitch, "roll": self.roll, "near": self.near,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PinholeCamera":
        d = dict(d)
        d["image_size"] = tuple(d["image_size"])
        d["position"] = tuple(d["position"])
        return cls(**d)


@dataclass
class ProjectedLane:
    """Projected boundary pixels and the anchor-row label they produce."""

    points_uv: np.ndarray
    anchor_x: np.ndarray
    present: bool = True


def fit_anchor_positions(points_uv: np.ndarray, anchor_rows: np.ndarray) -> np.ndarray:
    """Spline through projected points, evaluated at anchor rows.

    The spline is a natural cubic in image-row parameterization; fewer than
    four points fall back to linear interpolation. Rows outside the projected
    span come back absent.
    """
    xs = np.full(np.asarray(anchor_rows, dtype=float).shape, ABSENT_X)
    if points_uv.shape[0] < 2:
        return xs
    order = np.argsort(points_uv[:, 1])
    v = points_uv[order, 1]
    u = points_uv[order, 0]
    # Collapse duplicate rows so the interpolant is well defined.
    v_unique, idx = np.unique(v, return_index=True)
    u_unique = u[idx]
    if v_unique.size < 2:
        return xs
    anchor_rows = np.asarray(anchor_rows, dtype=float)
    covered = (anchor_rows >= v_unique[0]) & (anchor_rows <= v_unique[-1])
    if not covered.any():
        return xs
    if v_unique.size >= 4:
        spline = CubicSpline(v_unique, u_unique, bc_type="natural")
        xs[covered] = spline(anchor_rows[covered])
    else:
        xs[covered] = np.interp(anchor_rows[covered], v_unique, u_unique)
    return xs


def project_and_fit(
    boundary_points: np.ndarray,
    camera: PinholeCamera,
    anchor_rows: np.ndarray,
) -> ProjectedLane:
    """Project one boundary polyline and sample it at the anchor rows.

    Lanes with fewer than two visible points are absent rather than an error.
    Fitted positions outside the image width are clipped to absent.
    """
    uv, visible = camera.project(boundary_points)
    uv = uv[visible]
    if uv.shape[0] < 2:
        return ProjectedLane(points_uv=uv, anchor_x=np.full(len(anchor_rows), ABSENT_X), present=False)
    xs = fit_anchor_positions(uv, np.asarray(anchor_rows, dtype=float))
    width = camera.image_size[1]
    outside = (xs != ABSENT_X) & ((xs < 0) | (xs >= width))
    xs[outside] = ABSENT_X
    present = bool((xs != ABSENT_X).any())
    return ProjectedLane(points_uv=uv, anchor_x=xs, present=present)
