"""Row-anchor lane representation: grid geometry, label encoding and decoding.

A lane is represented by one horizontal position per predefined image row
(the row anchors). Each position is discretized into ``w`` gridding cells;
cell index ``w`` is reserved for "no lane at this anchor".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ValidationError

ABSENT_X = -2.0  # sentinel for a missing point, shared with the TuSimple label format


def default_anchor_rows(height: int = 288, first: int = 64, last: int = 284, count: int = 56) -> tuple[int, ...]:
    """Evenly spaced anchor rows, matching the usual 56-row layout for 288-high input."""
    rows = np.linspace(first, last, count)
    if np.any(rows >= height):
        raise ConfigurationError(f"anchor rows must stay below input height {height}")
    return tuple(int(round(r)) for r in rows)


@dataclass(frozen=True)
class RowAnchorConfig:
    """Gridding geometry every label and prediction lives in.

    ``anchor_rows`` are expressed in model-input pixel rows. Native-space
    labels are mapped onto them through the ``native_size``/``input_size``
    ratio.
    """

    num_lanes: int = 4
    num_cells: int = 100
    anchor_rows: tuple[int, ...] = field(default_factory=default_anchor_rows)
    input_size: tuple[int, int] = (288, 800)   # (height, width)
    native_size: tuple[int, int] = (720, 1280)  # (height, width)

    def __post_init__(self):
        rows = np.asarray(self.anchor_rows, dtype=float)
        if self.num_lanes < 1:
            raise ConfigurationError("need at least one lane slot")
        if self.num_cells < 2:
            raise ConfigurationError("need at least two gridding cells")
        if rows.size < 2:
            raise ConfigurationError("need at least two anchor rows")
        if np.any(np.diff(rows) <= 0):
            raise ConfigurationError("anchor_rows must be strictly increasing")
        if rows[-1] >= self.input_size[0]:
            raise ConfigurationError("anchor_rows must lie inside the input height")

    @property
    def num_anchors(self) -> int:
        return len(self.anchor_rows)

    @property
    def cell_width(self) -> float:
        """Width of one gridding cell in input pixels."""
        return self.input_size[1] / self.num_cells

    @property
    def row_scale(self) -> float:
        """Native rows per input row."""
        return self.native_size[0] / self.input_size[0]

    @property
    def x_scale(self) -> float:
        """Native columns per input column."""
        return self.native_size[1] / self.input_size[1]

    def native_anchor_rows(self) -> np.ndarray:
        """Anchor rows mapped to native pixel space."""
        return np.asarray(self.anchor_rows, dtype=float) * self.row_scale

    def cell_center_native_x(self, cells: np.ndarray) -> np.ndarray:
        """Native x coordinate of the center of each given cell index."""
        return (np.asarray(cells, dtype=float) + 0.5) * self.cell_width * self.x_scale


@dataclass
class LanePointLabel:
    """Per-lane x positions sampled at a shared list of native pixel rows.

    ``xs[i, k]`` is the x position of lane ``i`` at row ``rows[k]``, or the
    sentinel ``ABSENT_X`` where the lane has no point. ``raw_class_ids`` and
    ``presence`` are per-lane; class ids may be None for unlabelled datasets.
    """

    rows: np.ndarray
    xs: np.ndarray
    raw_class_ids: list[int | None]
    presence: list[bool]

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        if self.xs.shape[1] != self.rows.shape[0]:
            raise ValidationError(
                f"each lane needs one x per row: got {self.xs.shape[1]} xs for {self.rows.shape[0]} rows"
            )
        if len(self.raw_class_ids) != self.xs.shape[0] or len(self.presence) != self.xs.shape[0]:
            raise ValidationError("per-lane metadata length must match the number of lanes")

    @property
    def num_lanes(self) -> int:
        return self.xs.shape[0]

    def present_points(self, lane: int) -> np.ndarray:
        """(row, x) pairs of the lane's non-sentinel points."""
        mask = self.xs[lane] >= 0
        return np.stack([self.rows[mask], self.xs[lane][mask]], axis=1)

    @classmethod
    def empty(cls, rows: Sequence[float], num_lanes: int) -> "LanePointLabel":
        rows = np.asarray(rows, dtype=float)
        return cls(
            rows=rows,
            xs=np.full((num_lanes, rows.size), ABSENT_X),
            raw_class_ids=[None] * num_lanes,
            presence=[False] * num_lanes,
        )


@dataclass
class TargetGrid:
    """Integer training targets: one cell index per (lane, anchor), plus classes.

    ``cells[i, j]`` lies in ``[0, w]`` where ``w`` marks lane absence.
    ``class_targets[i]`` is the lane's super-class id, or -1 when unknown.
    """

    cells: np.ndarray
    class_targets: np.ndarray
    presence: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64)
        self.class_targets = np.asarray(self.class_targets, dtype=np.int64)
        self.presence = np.asarray(self.presence, dtype=bool)


def _match_anchor_rows(cfg: RowAnchorConfig, label_rows: np.ndarray, tol: float = 0.5) -> np.ndarray:
    """Index into ``label_rows`` for each configured anchor, or raise.

    Each anchor row, mapped to native space, must coincide with a labelled row
    within ``tol`` native pixels.
    """
    native_rows = cfg.native_anchor_rows()
    idx = np.empty(native_rows.size, dtype=np.int64)
    for j, r in enumerate(native_rows):
        k = int(np.argmin(np.abs(label_rows - r)))
        if abs(label_rows[k] - r) > tol:
            raise ConfigurationError(
                f"anchor row {cfg.anchor_rows[j]} maps to native row {r:.1f}, "
                f"but the label has no row within {tol} px of it"
            )
        idx[j] = k
    return idx


def encode_targets(label: LanePointLabel, cfg: RowAnchorConfig) -> TargetGrid:
    """Quantize a point label onto the row-anchor cell grid.

    Native x positions are rescaled to input width and floored into one of
    the ``w`` cells; sentinel or missing points get the absence index ``w``.
    Lanes beyond ``cfg.num_lanes`` are dropped in label order.
    """
    w = cfg.num_cells
    row_idx = _match_anchor_rows(cfg, label.rows)
    cells = np.full((cfg.num_lanes, cfg.num_anchors), w, dtype=np.int64)
    class_targets = np.full(cfg.num_lanes, -1, dtype=np.int64)
    presence = np.zeros(cfg.num_lanes, dtype=bool)

    for i in range(min(label.num_lanes, cfg.num_lanes)):
        presence[i] = bool(label.presence[i])
        if label.raw_class_ids[i] is not None:
            class_targets[i] = label.raw_class_ids[i]
        if not presence[i]:
            continue
        xs = label.xs[i][row_idx]
        valid = xs >= 0
        x_input = xs[valid] / cfg.x_scale
        cell = np.floor(x_input / cfg.cell_width).astype(np.int64)
        cells[i, valid] = np.clip(cell, 0, w - 1)
    return TargetGrid(cells=cells, class_targets=class_targets, presence=presence)


def row_anchor_accuracy(cells_pred: np.ndarray, cells_target: np.ndarray) -> float:
    """Fraction of (lane, anchor) grid entries predicted exactly right."""
    cells_pred = np.asarray(cells_pred)
    cells_target = np.asarray(cells_target)
    if cells_pred.shape != cells_target.shape:
        raise ValidationError("prediction and target grids must share a shape")
    return float(np.mean(cells_pred == cells_target))


def decode_prediction(
    probs: np.ndarray,
    cfg: RowAnchorConfig,
    refine: str = "expectation",
    atol: float = 1e-5,
) -> LanePointLabel:
    """Turn a probability volume (C, h, w+1) into native-space lane points.

    The argmax decides presence: anchors whose argmax is the absence cell emit
    the sentinel. For present anchors the default ``expectation`` refinement
    takes the probability-weighted mean of the ``w`` location cell centers
    (renormalized over them); ``argmax`` uses the winning cell center only.
    """
    probs = np.asarray(probs, dtype=float)
    expected = (cfg.num_lanes, cfg.num_anchors, cfg.num_cells + 1)
    if probs.shape != expected:
        raise ValidationError(f"probability volume must be {expected}, got {probs.shape}")
    if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=-1) - 1.0) > atol):
        raise ValidationError("each (lane, anchor) slice must be a probability distribution")
    if refine not in ("expectation", "argmax"):
        raise ConfigurationError(f"unknown refinement {refine!r}")

    w = cfg.num_cells
    rows = cfg.native_anchor_rows()
    label = LanePointLabel.empty(rows, cfg.num_lanes)
    winners = probs.argmax(axis=-1)
    centers_input = (np.arange(w) + 0.5) * cfg.cell_width

    for i in range(cfg.num_lanes):
        present_anchors = winners[i] < w
        if not present_anchors.any():
            continue
        label.presence[i] = True
        for j in np.nonzero(present_anchors)[0]:
            if refine == "argmax":
                x_input = centers_input[winners[i, j]]
            else:
                loc = probs[i, j, :w]
                x_input = float(loc @ centers_input) / float(loc.sum())
            label.xs[i, j] = x_input * cfg.x_scale
    return label
