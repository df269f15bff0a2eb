"""Simulator-free procedural backend: flat-ground road scenes.

Each frame is a fresh scene drawn from a per-frame seed: a road of one to
three adjacent lanes following a gentle polynomial centerline, painted lines
whose pattern follows their raw class, randomized sky/road palette, weather
tinting, and pixel noise. Labels are computed through the same projection
and spline-fitting path as the simulator backend, so every label can be
re-derived exactly from the stored scene parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

from ..laneclasses import LaneClassMapping
from ..rowanchor import LanePointLabel
from .boundaries import offset_polyline
from .camera import PinholeCamera, fit_anchor_positions

PAINT_WIDTH_M = 0.15
DOUBLE_LINE_GAP_M = 0.18
DASH_ON_M = 3.0
DASH_OFF_M = 4.5
FORWARD_START_M = 4.0
FORWARD_END_M = 90.0
FORWARD_STEP_M = 0.5


@dataclass
class SceneParams:
    """Everything needed to reproduce one frame deterministically."""

    scene_seed: int
    num_lanes: int
    lane_width_m: float
    curvature: float        # 1/m, lateral = 0.5 * curvature * x^2
    heading_skew: float     # rad, lateral += tan(skew) * x
    ego_offset_m: float
    line_class_ids: list[int]
    sky_top: tuple[int, int, int] = (96, 160, 224)
    sky_bottom: tuple[int, int, int] = (168, 200, 232)
    ground_color: tuple[int, int, int] = (88, 120, 72)
    road_color: tuple[int, int, int] = (96, 96, 100)
    noise_level: float = 4.0
    color_shift: tuple[int, int, int] = (0, 0, 0)

    @property
    def num_lines(self) -> int:
        return self.num_lanes + 1


def sample_scene(
    frame_seed: int,
    mapping: LaneClassMapping | None = None,
    color_shift: tuple[int, int, int] = (0, 0, 0),
) -> SceneParams:
    """Draw scene parameters from a per-frame seed."""
    mapping = mapping or LaneClassMapping()
    rng = np.random.default_rng(frame_seed)
    num_lanes = int(rng.integers(1, 4))
    universe = sorted(mapping.universe)
    line_ids = [int(universe[int(rng.integers(len(universe)))]) for _ in range(num_lanes + 1)]

    def jitter(base: tuple[int, int, int], spread: int) -> tuple[int, int, int]:
        return tuple(int(np.clip(c + rng.integers(-spread, spread + 1), 0, 255)) for c in base)

    return SceneParams(
        scene_seed=frame_seed,
        num_lanes=num_lanes,
        lane_width_m=float(rng.uniform(3.2, 3.9)),
        curvature=float(rng.uniform(-0.0035, 0.0035)),
        heading_skew=float(rng.uniform(-0.05, 0.05)),
        ego_offset_m=float(rng.uniform(-0.8, 0.8)),
        line_class_ids=line_ids,
        sky_top=jitter((96, 160, 224), 48),
        sky_bottom=jitter((168, 200, 232), 32),
        ground_color=jitter((88, 120, 72), 40),
        road_color=jitter((96, 96, 100), 24),
        noise_level=float(rng.uniform(2.0, 7.0)),
        color_shift=color_shift,
    )


def road_centerline(params: SceneParams) -> np.ndarray:
    """World-space road centerline polyline (x forward, y left, z up = 0)."""
    x = np.arange(FORWARD_START_M, FORWARD_END_M + 1e-9, FORWARD_STEP_M)
    lateral = 0.5 * params.curvature * x**2 + np.tan(params.heading_skew) * x + params.ego_offset_m
    return np.stack([x, lateral, np.zeros_like(x)], axis=1)


def centerline_headings(params: SceneParams) -> np.ndarray:
    """Analytic headings of the centerline (exact, not finite differenced)."""
    x = np.arange(FORWARD_START_M, FORWARD_END_M + 1e-9, FORWARD_STEP_M)
    slope = params.curvature * x + np.tan(params.heading_skew)
    return np.arctan2(slope, np.ones_like(slope))


def line_lateral_offsets(params: SceneParams) -> list[float]:
    """Lateral offsets of painted lines, ordered left (world) to right."""
    w = params.lane_width_m
    n = params.num_lanes
    return [(n / 2.0 - k) * w for k in range(n + 1)]


def line_world_points(params: SceneParams, line_index: int) -> np.ndarray:
    centers = road_centerline(params)
    headings = centerline_headings(params)
    return offset_polyline(centers, line_lateral_offsets(params)[line_index], headings)


def derive_label(
    params: SceneParams,
    camera: PinholeCamera,
    anchor_rows: np.ndarray,
) -> LanePointLabel:
    """Analytic label: project each painted line and fit at the anchor rows.

    Lines are ordered left to right in the image (world-left first maps to
    image-left for a forward camera).
    """
    anchor_rows = np.asarray(anchor_rows, dtype=float)
    xs = []
    classes: list[int | None] = []
    presence = []
    for k in range(params.num_lines):
        pts = line_world_points(params, k)
        uv, visible = camera.project(pts)
        fitted = fit_anchor_positions(uv[visible], anchor_rows)
        inside = (fitted >= 0) & (fitted < camera.image_size[1])
        fitted[~inside] = -2.0
        xs.append(fitted)
        classes.append(params.line_class_ids[k])
        presence.append(bool((fitted >= 0).any()))
    return LanePointLabel(
        rows=anchor_rows,
        xs=np.stack(xs),
        raw_class_ids=classes,
        presence=presence,
    )


def _pattern_segments(name: str) -> list[tuple[float, bool]]:
    """(lateral paint offset in meters, dashed flag) per painted stroke."""
    half = DOUBLE_LINE_GAP_M / 2
    if "solid_solid" in name:
        return [(-half, False), (half, False)]
    if "broken_broken" in name:
        return [(-half, True), (half, True)]
    if "solid_broken" in name:
        return [(-half, False), (half, True)]
    if "broken_solid" in name:
        return [(-half, True), (half, False)]
    dashed = name.startswith("broken") or name == "botts_dots"
    return [(0.0, dashed)]


def _paint_color(name: str) -> tuple[int, int, int]:
    if "yellow" in name:
        return (230, 200, 60)
    if name == "curb":
        return (150, 150, 150)
    if name == "grass":
        return (70, 150, 60)
    return (235, 235, 235)


def _draw_line(
    image: np.ndarray,
    params: SceneParams,
    camera: PinholeCamera,
    line_index: int,
    mapping: LaneClassMapping,
) -> None:
    name = mapping.name_of(params.line_class_ids[line_index])
    color = _paint_color(name)
    base_offset = line_lateral_offsets(params)[line_index]
    centers = road_centerline(params)
    headings = centerline_headings(params)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(centers[:, :2], axis=0), axis=1))])
    for sub, dashed in _pattern_segments(name):
        pts = offset_polyline(centers, base_offset + sub, headings)
        uv, visible = camera.project(pts)
        cam_z = camera.world_to_camera(pts)[:, 2]
        for i in range(len(pts) - 1):
            if not (visible[i] and visible[i + 1]):
                continue
            if dashed:
                phase = arc[i] % (DASH_ON_M + DASH_OFF_M)
                if phase > DASH_ON_M:
                    continue
            width_px = max(1, int(round(PAINT_WIDTH_M * camera.fx / max(cam_z[i], 1.0))))
            p0 = tuple(np.round(uv[i]).astype(int))
            p1 = tuple(np.round(uv[i + 1]).astype(int))
            cv2.line(image, p0, p1, color, thickness=width_px, lineType=cv2.LINE_8)


def render_frame(
    params: SceneParams,
    camera: PinholeCamera,
    mapping: LaneClassMapping | None = None,
    weather_darkening: float = 0.0,
) -> np.ndarray:
    """Render the scene to an RGB uint8 image of the camera's size."""
    mapping = mapping or LaneClassMapping()
    h, w = camera.image_size
    image = np.zeros((h, w, 3), dtype=np.uint8)

    # Sky gradient above the horizon, ground color below.
    horizon_uv, _ = camera.project(np.array([[1e6, 0.0, 0.0]]))
    horizon = int(np.clip(np.round(horizon_uv[0, 1]), 0, h - 1))
    ramp = np.linspace(0.0, 1.0, max(horizon, 1))[:, None]
    sky = (1 - ramp) * np.array(params.sky_top) + ramp * np.array(params.sky_bottom)
    image[:horizon] = sky[:, None, :].astype(np.uint8)
    image[horizon:] = params.ground_color

    # Road surface: polygon between the outermost lines, padded half a lane.
    pad = params.lane_width_m / 2.0
    centers = road_centerline(params)
    headings = centerline_headings(params)
    offsets = line_lateral_offsets(params)
    left_pts = offset_polyline(centers, offsets[0] + pad, headings)
    right_pts = offset_polyline(centers, offsets[-1] - pad, headings)
    uv_l, vis_l = camera.project(left_pts)
    uv_r, vis_r = camera.project(right_pts)
    if vis_l.any() and vis_r.any():
        poly = np.concatenate([uv_l[vis_l], uv_r[vis_r][::-1]], axis=0)
        cv2.fillPoly(image, [np.round(poly).astype(np.int32)], params.road_color)

    for k in range(params.num_lines):
        _draw_line(image, params, camera, k, mapping)

    out = image.astype(np.float32)
    if weather_darkening > 0:
        out *= 1.0 - 0.5 * float(np.clip(weather_darkening, 0.0, 1.0))
    rng = np.random.default_rng(params.scene_seed + 1)
    out += rng.normal(0.0, params.noise_level, size=out.shape)
    out += np.array(params.color_shift, dtype=np.float32)
    return np.clip(out, 0, 255).astype(np.uint8)
