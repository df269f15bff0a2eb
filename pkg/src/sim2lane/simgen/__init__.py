from .boundaries import LaneBoundarySample, headings_from_polyline, lane_boundaries_from_waypoints, offset_polyline
from .camera import PinholeCamera, fit_anchor_positions, project_and_fit
from .generate import (
    DEFAULT_CARLA_MAPS,
    GenerationRequest,
    StallRule,
    generate_dataset,
    rederive_label_from_meta,
    split_frames_across_maps,
    stall_check,
)
from .procedural import SceneParams, derive_label, render_frame, sample_scene
from .weather import WeatherParams, WeatherState, initial_weather, weather_step

__all__ = [
    "DEFAULT_CARLA_MAPS",
    "GenerationRequest",
    "LaneBoundarySample",
    "PinholeCamera",
    "SceneParams",
    "StallRule",
    "WeatherParams",
    "WeatherState",
    "derive_label",
    "fit_anchor_positions",
    "generate_dataset",
    "headings_from_polyline",
    "initial_weather",
    "lane_boundaries_from_waypoints",
    "offset_polyline",
    "project_and_fit",
    "rederive_label_from_meta",
    "render_frame",
    "sample_scene",
    "split_frames_across_maps",
    "stall_check",
    "weather_step",
]
