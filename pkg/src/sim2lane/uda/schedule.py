"""Learning-rate schedule: optional linear warmup, then cosine decay to zero."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigurationError


@dataclass(frozen=True)
class LrSchedule:
    peak: float
    total_steps: int
    warmup_steps: int = 0

    def __post_init__(self):
        if self.peak <= 0:
            raise ConfigurationError("peak learning rate must be positive")
        if self.total_steps < 1 or not 0 <= self.warmup_steps < self.total_steps:
            raise ConfigurationError("warmup must fit strictly inside the training horizon")


def lr_at(step: int, schedule: LrSchedule) -> float:
    """Learning rate at a step: 0 -> peak linearly over the warmup, then
    cosine decay peak -> 0 at the end of the horizon."""
    if step < 0 or step > schedule.total_steps:
        raise ConfigurationError(f"step {step} outside horizon [0, {schedule.total_steps}]")
    if schedule.warmup_steps > 0 and step < schedule.warmup_steps:
        return schedule.peak * step / schedule.warmup_steps
    span = schedule.total_steps - schedule.warmup_steps
    progress = (step - schedule.warmup_steps) / span
    return schedule.peak * 0.5 * (1.0 + math.cos(math.pi * progress))
