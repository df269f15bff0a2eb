"""Deterministic batch streams: unpaired two-domain batches and subset resampling.

An epoch is defined by the labelled (sim) dataset: every sim sample is
visited exactly once per epoch, while real samples are drawn from an
independently reshuffled cycle so the two streams stay unpaired.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from ..errors import ConfigurationError
from .dataset import FrameDataset, FrameSample


def _batched(indices: np.ndarray, batch_size: int) -> Iterator[np.ndarray]:
    for start in range(0, len(indices), batch_size):
        yield indices[start : start + batch_size]


class _ReshuffledCycle:
    """Endless index stream that reshuffles after each pass."""

    def __init__(self, size: int, rng: np.random.Generator):
        self.size = size
        self.rng = rng
        self._queue: list[int] = []

    def take(self, n: int) -> list[int]:
        out: list[int] = []
        while len(out) < n:
            if not self._queue:
                self._queue = list(self.rng.permutation(self.size))
            out.append(self._queue.pop(0))
        return out


def unpaired_batches(
    sim_ds: FrameDataset,
    real_ds: FrameDataset,
    batch_size: int,
    seed: int,
    epochs: int = 1,
) -> Iterator[tuple[list[FrameSample], list[FrameSample]]]:
    """Stream (sim batch, real batch) pairs; sim coverage defines the epoch."""
    if len(sim_ds) == 0 or len(real_ds) == 0:
        raise ConfigurationError("both datasets must be nonempty")
    if batch_size > len(sim_ds) or batch_size > len(real_ds):
        raise ConfigurationError(
            f"batch size {batch_size} exceeds a dataset size ({len(sim_ds)} sim / {len(real_ds)} real)"
        )
    sim_rng = np.random.default_rng([seed, 0])
    real_rng = np.random.default_rng([seed, 1])
    real_cycle = _ReshuffledCycle(len(real_ds), real_rng)
    for _ in range(epochs):
        order = sim_rng.permutation(len(sim_ds))
        for sim_idx in _batched(order, batch_size):
            real_idx = real_cycle.take(len(sim_idx))
            yield (
                [sim_ds[int(i)] for i in sim_idx],
                [real_ds[int(i)] for i in real_idx],
            )


def labelled_batches(
    ds: FrameDataset,
    batch_size: int,
    seed: int,
    epochs: int = 1,
) -> Iterator[list[FrameSample]]:
    """Single-domain epoch stream with per-epoch reshuffling."""
    if len(ds) == 0:
        raise ConfigurationError("dataset must be nonempty")
    if batch_size > len(ds):
        raise ConfigurationError(f"batch size {batch_size} exceeds dataset size {len(ds)}")
    rng = np.random.default_rng([seed, 0])
    for _ in range(epochs):
        for idx in _batched(rng.permutation(len(ds)), batch_size):
            yield [ds[int(i)] for i in idx]


def resample_indices(full_size: int, subset_size: int, epoch_index: int, seed: int) -> np.ndarray:
    """Uniform sample without replacement, reproducible per (seed, epoch)."""
    if subset_size > full_size:
        raise ConfigurationError(f"subset size {subset_size} exceeds dataset size {full_size}")
    rng = np.random.default_rng([seed, epoch_index])
    return rng.choice(full_size, size=subset_size, replace=False)


def resample_subset(
    full_ds: FrameDataset,
    subset_size: int,
    epoch_index: int,
    seed: int,
) -> FrameDataset:
    """Fresh uniform subset for one epoch; different epochs give different draws."""
    idx = resample_indices(len(full_ds), subset_size, epoch_index, seed)
    return full_ds.subset([int(i) for i in idx])


def steps_per_epoch(dataset_size: int, batch_size: int) -> int:
    return (dataset_size + batch_size - 1) // batch_size


def sequence_subset(items: Sequence, indices: Sequence[int]) -> list:
    return [items[int(i)] for i in indices]
