"""Dataset generation: frame budgeting across maps, stall detection, output.

Backends: ``procedural`` renders flat-ground scenes with no external
dependencies; ``carla`` drives a running simulator over its RPC endpoint.
Both write the standard dataset layout (images/, labels.txt, manifest.yaml)
plus a generation metadata file from which every label can be re-derived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import cv2
import numpy as np

from ..data.dataset import DatasetManifest, write_manifest
from ..data.labels import LabelRecord, write_label_file
from ..errors import ConfigurationError
from ..laneclasses import LaneClassMapping
from ..rowanchor import RowAnchorConfig
from .camera import PinholeCamera
from .procedural import derive_label, render_frame, sample_scene
from .weather import WeatherParams, initial_weather, weather_step

DEFAULT_CARLA_MAPS = ("Town01", "Town03", "Town04", "Town05", "Town07", "Town10HD")
DEFAULT_PROCEDURAL_MAPS = tuple(f"flat{i:02d}" for i in range(6))

GEN_META_NAME = "gen_meta.json"


@dataclass(frozen=True)
class StallRule:
    min_displacement_m: float = 0.5
    timeout_s: float = 5.0


@dataclass
class GenerationRequest:
    total_frames: int
    out_root: Path
    backend: str = "procedural"
    maps: tuple[str, ...] | None = None
    camera: PinholeCamera | None = None
    row_anchor: RowAnchorConfig = field(default_factory=RowAnchorConfig)
    weather: WeatherParams = field(default_factory=WeatherParams)
    mapping: LaneClassMapping = field(default_factory=LaneClassMapping)
    seed: int = 0
    frame_dt_s: float = 1.0
    stall: StallRule = field(default_factory=StallRule)
    color_shift: tuple[int, int, int] = (0, 0, 0)
    carla_host: str = "localhost"
    carla_port: int = 2000

    def __post_init__(self):
        self.out_root = Path(self.out_root)
        if self.backend not in ("procedural", "carla"):
            raise ConfigurationError(f"backend must be 'procedural' or 'carla', got {self.backend!r}")
        if self.maps is None:
            default = DEFAULT_CARLA_MAPS if self.backend == "carla" else DEFAULT_PROCEDURAL_MAPS
            self.maps = tuple(default)
        if self.total_frames < len(self.maps):
            raise ConfigurationError(
                f"need at least one frame per map: {self.total_frames} frames for {len(self.maps)} maps"
            )
        if self.camera is None:
            h, w = self.row_anchor.native_size
            self.camera = PinholeCamera.from_fov(
                fov_deg=90.0, image_size=(h, w), position=(0.0, 0.0, 1.6), pitch=np.radians(-3.0)
            )


def split_frames_across_maps(total: int, maps: Sequence[str]) -> dict[str, int]:
    """Even split: per-map counts differ by at most one and sum to total."""
    if not maps:
        raise ConfigurationError("need at least one map")
    if total < len(maps):
        raise ConfigurationError("need at least one frame per map")
    base = total // len(maps)
    extra = total % len(maps)
    return {name: base + (1 if i < extra else 0) for i, name in enumerate(maps)}


def stall_check(
    pose_history: Sequence[tuple[float, Sequence[float]]],
    min_displacement_m: float,
    timeout_s: float,
) -> str:
    """``respawn`` when the ego has not moved enough over the timeout window.

    ``pose_history`` is a time-ordered list of (t, position) samples. The
    displacement measured is from the newest pose back to the pose at (or just
    before) the start of the window; histories shorter than the window keep.
    """
    if not pose_history:
        raise ConfigurationError("pose history must be nonempty")
    t_now, pos_now = pose_history[-1]
    window_start = t_now - timeout_s
    if pose_history[0][0] > window_start:
        return "keep"
    anchor = pose_history[0]
    for t, pos in pose_history:
        if t <= window_start:
            anchor = (t, pos)
        else:
            break
    disp = float(np.linalg.norm(np.asarray(pos_now, dtype=float) - np.asarray(anchor[1], dtype=float)))
    return "respawn" if disp < min_displacement_m else "keep"


def _procedural_frames(request: GenerationRequest) -> tuple[list[LabelRecord], list[dict]]:
    """Render all frames, writing images as we go; returns label records + metadata."""
    counts = split_frames_across_maps(request.total_frames, request.maps)
    anchor_rows = request.row_anchor.native_anchor_rows()
    (request.out_root / "images").mkdir(parents=True, exist_ok=True)

    records: list[LabelRecord] = []
    frame_meta: list[dict] = []
    weather = initial_weather(request.weather)
    weather_rng = np.random.default_rng([request.seed, 5])
    frame_index = 0
    for map_index, map_name in enumerate(request.maps):
        for k in range(counts[map_name]):
            scene_seed = int(
                np.random.default_rng([request.seed, map_index, k]).integers(2**31)
            )
            weather = weather_step(weather, request.frame_dt_s, weather_rng, request.weather)
            params = sample_scene(scene_seed, request.mapping, request.color_shift)
            image = render_frame(
                params, request.camera, request.mapping,
                weather_darkening=weather.storm_intensity,
            )
            rel = f"images/{frame_index:06d}.png"
            cv2.imwrite(str(request.out_root / rel), cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
            label = derive_label(params, request.camera, anchor_rows)
            records.append(LabelRecord.from_label(label, rel))
            frame_meta.append(
                {
                    "frame": frame_index,
                    "map": map_name,
                    "scene_seed": scene_seed,
                    "storm_intensity": weather.storm_intensity,
                }
            )
            frame_index += 1
    return records, frame_meta


def generate_dataset(request: GenerationRequest) -> DatasetManifest:
    """Generate a labelled dataset and return its manifest."""
    if request.backend == "carla":
        from .carla_backend import generate_with_carla

        records, frame_meta = generate_with_carla(request)
    else:
        records, frame_meta = _procedural_frames(request)

    write_label_file(records, request.out_root / "labels.txt")
    write_manifest(request.out_root, {"train": ["labels.txt"]})
    meta = {
        "seed": request.seed,
        "backend": request.backend,
        "maps": list(request.maps),
        "camera": request.camera.as_dict(),
        "class_universe": sorted(request.mapping.universe),
        "anchor_rows_native": [float(r) for r in request.row_anchor.native_anchor_rows()],
        "color_shift": list(request.color_shift),
        "frames": frame_meta,
    }
    (request.out_root / GEN_META_NAME).write_text(json.dumps(meta, indent=2))
    return DatasetManifest.resolve(request.out_root, "train")


def rederive_label_from_meta(root: str | Path, frame_index: int):
    """Recompute a generated frame's label from stored scene parameters.

    Only meaningful for the procedural backend; used to audit that written
    labels match the analytic geometry.
    """
    root = Path(root)
    meta = json.loads((root / GEN_META_NAME).read_text())
    if meta["backend"] != "procedural":
        raise ConfigurationError("labels can only be re-derived for the procedural backend")
    camera = PinholeCamera.from_dict(meta["camera"])
    entry = meta["frames"][frame_index]
    params = sample_scene(entry["scene_seed"], color_shift=tuple(meta["color_shift"]))
    return derive_label(params, camera, np.asarray(meta["anchor_rows_native"]))
