"""Simulator-backed generation over the CARLA RPC endpoint.

Requires the ``carla`` Python client and a reachable server. The ego vehicle
roams on autopilot; lane-center waypoints are widened into boundary
polylines, projected through the RGB camera, and spline-fitted at the anchor
rows. Weather follows the same sinusoidal-sun/storm process as the
procedural backend, pushed to the server every frame. Frames where the ego
has stalled past the timeout trigger a respawn instead of a save.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from ..data.labels import LabelRecord
from ..errors import BackendError
from ..rowanchor import ABSENT_X, LanePointLabel
from .boundaries import lane_boundaries_from_waypoints
from .camera import PinholeCamera, fit_anchor_positions
from .generate import split_frames_across_maps, stall_check
from .weather import initial_weather, weather_step

WAYPOINT_STEP_M = 1.0
WAYPOINT_SPAN_M = 80.0

# CARLA lane marking -> raw class id in the default 15-id universe.
_MARKING_TO_RAW = {
    ("Broken", "White"): 0,
    ("Broken", "Yellow"): 1,
    ("BrokenBroken", "White"): 2,
    ("BrokenBroken", "Yellow"): 3,
    ("BottsDots", "White"): 4,
    ("Solid", "White"): 5,
    ("Solid", "Yellow"): 6,
    ("SolidSolid", "White"): 7,
    ("SolidSolid", "Yellow"): 8,
    ("SolidBroken", "White"): 9,
    ("SolidBroken", "Yellow"): 10,
    ("BrokenSolid", "White"): 11,
    ("BrokenSolid", "Yellow"): 12,
    ("Curb", "White"): 13,
    ("Grass", "White"): 14,
}


def _require_carla():
    try:
        import carla  # noqa: F401

        return carla
    except ImportError as exc:
        raise BackendError(
            "the carla backend needs the 'carla' Python package; "
            "install it or use the procedural backend"
        ) from exc


def _connect(host: str, port: int, timeout_s: float = 5.0):
    carla = _require_carla()
    try:
        client = carla.Client(host, port)
        client.set_timeout(timeout_s)
        client.get_server_version()
        return client
    except Exception as exc:
        raise BackendError(f"simulator unreachable at {host}:{port}: {exc}") from exc


def _raw_class_of(marking) -> int:
    key = (str(getattr(marking, "type", "Broken")).split(".")[-1],
           str(getattr(marking, "color", "White")).split(".")[-1])
    return _MARKING_TO_RAW.get(key, _MARKING_TO_RAW.get((key[0], "White"), 0))


def _waypoint_chain(world_map, location, step: float = WAYPOINT_STEP_M):
    wp = world_map.get_waypoint(location)
    chain = [wp]
    dist = step
    while dist <= WAYPOINT_SPAN_M:
        nxt = chain[-1].next(step)
        if not nxt:
            break
        chain.append(nxt[0])
        dist += step
    return chain


def _label_from_waypoints(chain, camera: PinholeCamera, anchor_rows: np.ndarray) -> LanePointLabel:
    centers = np.array(
        [[w.transform.location.x, -w.transform.location.y, w.transform.location.z] for w in chain]
    )
    width = float(np.mean([w.lane_width for w in chain]))
    boundary = lane_boundaries_from_waypoints(centers, width)
    xs = []
    classes = []
    presence = []
    for side, marking_attr in (("left", "left_lane_marking"), ("right", "right_lane_marking")):
        pts = getattr(boundary, side)
        uv, visible = camera.project(pts)
        fitted = fit_anchor_positions(uv[visible], anchor_rows)
        inside = (fitted != ABSENT_X) & ((fitted < 0) | (fitted >= camera.image_size[1]))
        fitted[inside] = ABSENT_X
        xs.append(fitted)
        classes.append(_raw_class_of(getattr(chain[0], marking_attr, None)))
        presence.append(bool((fitted >= 0).any()))
    return LanePointLabel(
        rows=np.asarray(anchor_rows, dtype=float),
        xs=np.stack(xs),
        raw_class_ids=classes,
        presence=presence,
    )


def generate_with_carla(request) -> tuple[list[LabelRecord], list[dict]]:
    """Drive the simulator and capture frames; see generate.generate_dataset."""
    import carla
    import cv2

    client = _connect(request.carla_host, request.carla_port)
    counts = split_frames_across_maps(request.total_frames, request.maps)
    anchor_rows = request.row_anchor.native_anchor_rows()
    (Path(request.out_root) / "images").mkdir(parents=True, exist_ok=True)

    records: list[LabelRecord] = []
    frame_meta: list[dict] = []
    rng = np.random.default_rng([request.seed, 9])
    weather_rng = np.random.default_rng([request.seed, 5])
    weather = initial_weather(request.weather)
    frame_index = 0

    for map_name in request.maps:
        world = client.load_world(map_name)
        world_map = world.get_map()
        blueprints = world.get_blueprint_library()
        spawn_points = world_map.get_spawn_points()
        vehicle_bp = blueprints.filter("vehicle.*")[0]
        vehicle = world.spawn_actor(vehicle_bp, spawn_points[int(rng.integers(len(spawn_points)))])
        vehicle.set_autopilot(True)

        cam_bp = blueprints.find("sensor.camera.rgb")
        h, w = request.camera.image_size
        cam_bp.set_attribute("image_size_x", str(w))
        cam_bp.set_attribute("image_size_y", str(h))
        cam_transform = carla.Transform(
            carla.Location(x=request.camera.position[0], z=request.camera.position[2]),
            carla.Rotation(pitch=float(np.degrees(request.camera.pitch))),
        )
        frames: list[np.ndarray] = []
        sensor = world.spawn_actor(cam_bp, cam_transform, attach_to=vehicle)
        sensor.listen(lambda img: frames.append(
            np.frombuffer(img.raw_data, dtype=np.uint8).reshape(h, w, 4)[:, :, [2, 1, 0]].copy()
        ))

        pose_history: list[tuple[float, tuple[float, float, float]]] = []
        try:
            captured = 0
            t_sim = 0.0
            while captured < counts[map_name]:
                time.sleep(request.frame_dt_s)
                t_sim += request.frame_dt_s
                loc = vehicle.get_location()
                pose_history.append((t_sim, (loc.x, loc.y, loc.z)))
                pose_history = [p for p in pose_history if p[0] >= t_sim - 2 * request.stall.timeout_s]
                if stall_check(pose_history, request.stall.min_displacement_m, request.stall.timeout_s) == "respawn":
                    vehicle.set_transform(spawn_points[int(rng.integers(len(spawn_points)))])
                    pose_history.clear()
                    continue
                if pose_history[:-1] and pose_history[-1][1] == pose_history[-2][1]:
                    continue  # never save two frames at the same pose

                weather = weather_step(weather, request.frame_dt_s, weather_rng, request.weather)
                world.set_weather(carla.WeatherParameters(
                    cloudiness=weather.cloudiness,
                    precipitation=weather.precipitation,
                    precipitation_deposits=weather.precipitation_deposits,
                    sun_altitude_angle=weather.sun_altitude_deg,
                ))
                if not frames:
                    continue
                image = frames[-1]
                frames.clear()

                cam_world = PinholeCamera(
                    fx=request.camera.fx, fy=request.camera.fy,
                    cx=request.camera.cx, cy=request.camera.cy,
                    image_size=request.camera.image_size,
                    position=(loc.x + request.camera.position[0], -loc.y, loc.z + request.camera.position[2]),
                    yaw=-np.radians(vehicle.get_transform().rotation.yaw),
                    pitch=request.camera.pitch,
                )
                label = _label_from_waypoints(_waypoint_chain(world_map, loc), cam_world, anchor_rows)
                rel = f"images/{frame_index:06d}.png"
                cv2.imwrite(str(Path(request.out_root) / rel), image[:, :, ::-1])
                records.append(LabelRecord.from_label(label, rel))
                frame_meta.append({"frame": frame_index, "map": map_name, "pose": list(pose_history[-1][1])})
                frame_index += 1
                captured += 1
        finally:
            sensor.stop()
            sensor.destroy()
            vehicle.destroy()
    return records, frame_meta
