"""Dataset manifests and frame loading for both domains.

Directory layout (generated datasets):

    root/
      manifest.yaml        # split name -> list of label files (optional)
      images/...           # referenced by raw_file, relative to root
      labels.txt           # default label file when no manifest exists

The TuSimple native layout (``clips/`` plus per-split label files) is covered
by writing a manifest that points each split at its label file(s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import cv2
import numpy as np
import yaml

from ..errors import ConfigurationError, LoadError
from ..rowanchor import LanePointLabel
from .labels import LabelRecord, read_label_file

MANIFEST_NAME = "manifest.yaml"


@dataclass(frozen=True)
class DatasetManifest:
    """Where one split of a dataset lives on disk."""

    root: Path
    split: str
    label_files: tuple[Path, ...]
    frame_count: int

    @classmethod
    def resolve(cls, root: str | Path, split: str = "train") -> "DatasetManifest":
        """Locate the label files for a split under ``root``.

        Prefers ``manifest.yaml``; falls back to ``labels_{split}.txt`` and,
        for the train split, plain ``labels.txt``. TuSimple's native naming
        (``label_data_*.json`` for train, ``test_label.json`` for test) is
        picked up automatically when present.
        """
        root = Path(root)
        manifest_path = root / MANIFEST_NAME
        candidates: list[Path] = []
        if manifest_path.exists():
            spec = yaml.safe_load(manifest_path.read_text()) or {}
            splits = spec.get("splits", {})
            if split not in splits:
                raise ConfigurationError(f"manifest at {manifest_path} has no split {split!r}")
            entries = splits[split]
            if isinstance(entries, str):
                entries = [entries]
            candidates = [root / e for e in entries]
        else:
            named = root / f"labels_{split}.txt"
            if named.exists():
                candidates = [named]
            elif split == "train" and (root / "labels.txt").exists():
                candidates = [root / "labels.txt"]
            elif split == "train" and sorted(root.glob("label_data_*.json")):
                candidates = sorted(root.glob("label_data_*.json"))
            elif split == "test" and (root / "test_label.json").exists():
                candidates = [root / "test_label.json"]
        if not candidates:
            raise ConfigurationError(f"no label files found for split {split!r} under {root}")
        for c in candidates:
            if not c.exists():
                raise ConfigurationError(f"label file {c} named by the manifest does not exist")
        count = sum(len(read_label_file(c)) for c in candidates)
        return cls(root=root, split=split, label_files=tuple(candidates), frame_count=count)


def write_manifest(root: str | Path, splits: dict[str, Sequence[str]]) -> Path:
    path = Path(root) / MANIFEST_NAME
    payload = {"splits": {k: list(v) for k, v in splits.items()}}
    path.write_text(yaml.safe_dump(payload, sort_keys=True))
    return path


@dataclass
class FrameSample:
    """One image with its optional label and domain tag."""

    image: np.ndarray
    label: LanePointLabel | None
    domain: str
    source_path: str

    def __post_init__(self):
        if self.domain not in ("sim", "real"):
            raise ConfigurationError(f"domain must be 'sim' or 'real', got {self.domain!r}")


class FrameDataset:
    """Ordered collection of frames; images decode lazily on access.

    Samples come back in label-record order, so iteration is deterministic.
    """

    def __init__(
        self,
        records: Sequence[LabelRecord],
        root: Path,
        domain: str,
        with_labels: bool = True,
    ):
        if domain == "sim" and not with_labels:
            raise ConfigurationError("sim-domain datasets must carry labels")
        self.records = list(records)
        self.root = Path(root)
        self.domain = domain
        self.with_labels = with_labels
        for rec in self.records:
            if not (self.root / rec.raw_file).exists():
                raise LoadError(f"image file missing for record {rec.raw_file!r}")

    def __len__(self) -> int:
        return len(self.records)

    def image_path(self, index: int) -> Path:
        return self.root / self.records[index].raw_file

    def load_image(self, index: int) -> np.ndarray:
        path = self.image_path(index)
        bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
        if bgr is None:
            raise LoadError(f"could not decode image {path}")
        return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)

    def __getitem__(self, index: int) -> FrameSample:
        rec = self.records[index]
        label = rec.to_label() if self.with_labels else None
        return FrameSample(
            image=self.load_image(index),
            label=label,
            domain=self.domain,
            source_path=str(self.image_path(index)),
        )

    def __iter__(self) -> Iterator[FrameSample]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices: Sequence[int]) -> "FrameDataset":
        picked = [self.records[i] for i in indices]
        return FrameDataset(picked, self.root, self.domain, self.with_labels)


def load_dataset(
    manifest: DatasetManifest,
    domain: str = "sim",
    with_labels: bool = True,
) -> FrameDataset:
    """Load the frames a manifest points at, in deterministic order."""
    records: list[LabelRecord] = []
    for label_file in manifest.label_files:
        records.extend(read_label_file(label_file))
    return FrameDataset(records, manifest.root, domain, with_labels)


@dataclass
class DatasetSplits:
    """Train/val/test datasets for one domain; val and test are optional."""

    train: FrameDataset
    val: FrameDataset | None = None
    test: FrameDataset | None = None

    @classmethod
    def from_root(
        cls,
        root: str | Path,
        domain: str,
        with_labels: bool = True,
        eval_with_labels: bool = True,
        splits: Sequence[str] = ("train", "val", "test"),
    ) -> "DatasetSplits":
        loaded: dict[str, FrameDataset | None] = {"train": None, "val": None, "test": None}
        for split in splits:
            try:
                manifest = DatasetManifest.resolve(root, split)
            except ConfigurationError:
                if split == "train":
                    raise
                continue
            labels = with_labels if split == "train" else eval_with_labels
            loaded[split] = load_dataset(manifest, domain, with_labels=labels)
        assert loaded["train"] is not None
        return cls(train=loaded["train"], val=loaded["val"], test=loaded["test"])
