"""Lane class taxonomy: raw simulator/dataset ids and the two super-classes.

Lane paint comes in many flavours (single/double, broken/solid, colours,
botts dots, curbs); detection training and evaluation collapse them into two
super-classes: DASHED and CONTINUOUS. Any marking that contains a solid
component (including solid-dashed combinations) counts as continuous.

The raw universe below is editable data: datasets may ship their own table
as JSON and load it with :func:`load_mapping`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

from .errors import MappingError


class SuperClass(IntEnum):
    DASHED = 0
    CONTINUOUS = 1


# Default 15-id raw universe. Names follow simulator lane-marking conventions;
# ids are stable and referenced by generated datasets.
DEFAULT_RAW_CLASSES: dict[int, tuple[str, SuperClass]] = {
    0: ("broken_white", SuperClass.DASHED),
    1: ("broken_yellow", SuperClass.DASHED),
    2: ("broken_broken_white", SuperClass.DASHED),
    3: ("broken_broken_yellow", SuperClass.DASHED),
    4: ("botts_dots", SuperClass.DASHED),
    5: ("solid_white", SuperClass.CONTINUOUS),
    6: ("solid_yellow", SuperClass.CONTINUOUS),
    7: ("solid_solid_white", SuperClass.CONTINUOUS),
    8: ("solid_solid_yellow", SuperClass.CONTINUOUS),
    9: ("solid_broken_white", SuperClass.CONTINUOUS),
    10: ("solid_broken_yellow", SuperClass.CONTINUOUS),
    11: ("broken_solid_white", SuperClass.CONTINUOUS),
    12: ("broken_solid_yellow", SuperClass.CONTINUOUS),
    13: ("curb", SuperClass.CONTINUOUS),
    14: ("grass", SuperClass.CONTINUOUS),
}


@dataclass(frozen=True)
class LaneClassMapping:
    """Total, deterministic map from raw class ids to super-classes."""

    table: dict[int, SuperClass] = field(
        default_factory=lambda: {k: sc for k, (_, sc) in DEFAULT_RAW_CLASSES.items()}
    )
    names: dict[int, str] = field(
        default_factory=lambda: {k: name for k, (name, _) in DEFAULT_RAW_CLASSES.items()}
    )

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(self.table)

    def name_of(self, raw_id: int) -> str:
        return self.names.get(raw_id, f"class_{raw_id}")

    def id_of(self, name: str) -> int:
        for raw_id, n in self.names.items():
            if n == name:
                return raw_id
        raise MappingError(f"no raw class named {name!r}")


def map_lane_class(raw_id: int | SuperClass, mapping: LaneClassMapping | None = None) -> SuperClass:
    """Map a raw class id to its super-class.

    Super-classes map to themselves, so applying the mapping twice is the
    same as applying it once.
    """
    if isinstance(raw_id, SuperClass):
        return raw_id
    mapping = mapping or LaneClassMapping()
    try:
        return mapping.table[raw_id]
    except KeyError:
        raise MappingError(f"raw class id {raw_id} is not in the declared universe") from None


def load_mapping(path: str | Path) -> LaneClassMapping:
    """Load an editable mapping table from JSON.

    Format: ``{"classes": [{"id": 0, "name": "broken_white", "super": "dashed"}, ...]}``.
    """
    data = json.loads(Path(path).read_text())
    table: dict[int, SuperClass] = {}
    names: dict[int, str] = {}
    for entry in data["classes"]:
        sc = SuperClass.DASHED if entry["super"].lower() == "dashed" else SuperClass.CONTINUOUS
        table[int(entry["id"])] = sc
        names[int(entry["id"])] = entry.get("name", f"class_{entry['id']}")
    return LaneClassMapping(table=table, names=names)


def dump_mapping(mapping: LaneClassMapping, path: str | Path) -> None:
    """Write a mapping table in the JSON format accepted by :func:`load_mapping`."""
    payload = {
        "classes": [
            {"id": raw_id, "name": mapping.name_of(raw_id), "super": sc.name.lower()}
            for raw_id, sc in sorted(mapping.table.items())
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2))
