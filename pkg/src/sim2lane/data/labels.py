"""TuSimple-format label file reading and writing.

One JSON record per line with fields ``lanes`` (list of per-lane x lists,
-2 marking an absent point), ``h_samples`` (shared row list) and ``raw_file``
(image path relative to the dataset root). Datasets with class labels add a
``classes`` field with one raw class id per lane.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ..errors import ParseError
from ..rowanchor import ABSENT_X, LanePointLabel


@dataclass
class LabelRecord:
    """One frame's label as stored on disk."""

    raw_file: str
    h_samples: list[int]
    lanes: list[list[float]]
    classes: list[int] | None = None

    def to_label(self) -> LanePointLabel:
        if not self.lanes:
            rows = np.asarray(self.h_samples, dtype=float)
            return LanePointLabel.empty(rows, num_lanes=0)
        xs = np.asarray(self.lanes, dtype=float)
        presence = [bool((lane >= 0).any()) for lane in xs]
        classes: list[int | None]
        if self.classes is None:
            classes = [None] * xs.shape[0]
        else:
            classes = [int(c) for c in self.classes]
        return LanePointLabel(
            rows=np.asarray(self.h_samples, dtype=float),
            xs=xs,
            raw_class_ids=classes,
            presence=presence,
        )

    @classmethod
    def from_label(cls, label: LanePointLabel, raw_file: str) -> "LabelRecord":
        classes = None
        if any(c is not None for c in label.raw_class_ids):
            classes = [int(c) if c is not None else -1 for c in label.raw_class_ids]
        return cls(
            raw_file=raw_file,
            h_samples=[int(round(r)) for r in label.rows],
            lanes=[[float(x) for x in lane] for lane in label.xs],
            classes=classes,
        )


def _parse_record(payload: str, line_no: int) -> LabelRecord:
    try:
        obj = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", line=line_no) from None
    for key in ("raw_file", "h_samples", "lanes"):
        if key not in obj:
            raise ParseError(f"missing required field {key!r}", line=line_no)
    h_samples = obj["h_samples"]
    lanes = obj["lanes"]
    for lane in lanes:
        if len(lane) != len(h_samples):
            raise ParseError(
                f"lane has {len(lane)} x values but h_samples has {len(h_samples)}",
                line=line_no,
            )
    classes = obj.get("classes")
    if classes is not None and len(classes) != len(lanes):
        raise ParseError("classes field must list one id per lane", line=line_no)
    return LabelRecord(raw_file=obj["raw_file"], h_samples=h_samples, lanes=lanes, classes=classes)


def read_label_file(path: str | Path) -> list[LabelRecord]:
    """Parse a label file; empty files yield an empty list."""
    records = []
    with open(path, "r") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            records.append(_parse_record(line, line_no))
    return records


def iter_label_files(paths: Iterable[str | Path]) -> Iterator[LabelRecord]:
    for path in paths:
        yield from read_label_file(path)


def write_label_file(records: Iterable[LabelRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for rec in records:
            obj: dict = {
                "lanes": rec.lanes,
                "h_samples": rec.h_samples,
                "raw_file": rec.raw_file,
            }
            if rec.classes is not None:
                obj["classes"] = rec.classes
            fh.write(json.dumps(obj) + "\n")


def sentinelize(xs: np.ndarray) -> np.ndarray:
    """Replace negative x values with the canonical sentinel."""
    out = np.asarray(xs, dtype=float).copy()
    out[out < 0] = ABSENT_X
    return out
