"""Dynamic weather: sinusoidal sun motion and occasional storms.

The sun's altitude follows a sinusoid of the simulation clock. Storms start
stochastically, ramp their intensity linearly up to a peak and back down,
and drive cloudiness, precipitation and precipitation deposits while active.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class WeatherParams:
    sun_amplitude_deg: float = 75.0
    sun_period_s: float = 600.0
    sun_phase_rad: float = 0.0
    storm_rate_per_s: float = 1.0 / 120.0  # expected storm starts per second
    storm_ramp_s: float = 20.0             # up then down over 2 * ramp
    storm_enabled: bool = True
    base_cloudiness: float = 10.0

    def __post_init__(self):
        if not 0 < self.sun_amplitude_deg <= 90:
            raise ValidationError("sun amplitude must lie in (0, 90] degrees")
        if self.sun_period_s <= 0 or self.storm_ramp_s <= 0:
            raise ValidationError("periods must be positive")


@dataclass(frozen=True)
class WeatherState:
    """Snapshot of the weather at simulation time ``t``."""

    t: float = 0.0
    sun_altitude_deg: float = 0.0
    storm_intensity: float = 0.0   # in [0, 1]
    cloudiness: float = 10.0       # all levels in [0, 100]
    precipitation: float = 0.0
    precipitation_deposits: float = 0.0
    storm_time_left: float = 0.0   # seconds until the active storm ends

    def __post_init__(self):
        if not -90.0 <= self.sun_altitude_deg <= 90.0:
            raise ValidationError("sun altitude out of [-90, 90]")
        for name in ("cloudiness", "precipitation", "precipitation_deposits"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValidationError(f"{name} out of [0, 100]")
        if not 0.0 <= self.storm_intensity <= 1.0:
            raise ValidationError("storm intensity out of [0, 1]")


def _sun_altitude(t: float, params: WeatherParams) -> float:
    alt = params.sun_amplitude_deg * np.sin(2.0 * np.pi * t / params.sun_period_s + params.sun_phase_rad)
    return float(np.clip(alt, -90.0, 90.0))


def _storm_intensity(time_left: float, params: WeatherParams) -> float:
    """Triangular envelope: up over ramp seconds, down over ramp seconds."""
    duration = 2.0 * params.storm_ramp_s
    elapsed = duration - time_left
    if time_left <= 0.0 or elapsed < 0.0:
        return 0.0
    if elapsed < params.storm_ramp_s:
        return elapsed / params.storm_ramp_s
    return max(0.0, time_left / params.storm_ramp_s)


def weather_step(
    state: WeatherState,
    dt: float,
    rng: np.random.Generator,
    params: WeatherParams = WeatherParams(),
) -> WeatherState:
    """Advance the weather clock by ``dt`` seconds."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    t = state.t + dt
    time_left = max(0.0, state.storm_time_left - dt)
    if params.storm_enabled and time_left == 0.0:
        # Memoryless storm starts; probability scales with the step length.
        if rng.random() < 1.0 - np.exp(-params.storm_rate_per_s * dt):
            time_left = 2.0 * params.storm_ramp_s
    intensity = _storm_intensity(time_left, params) if params.storm_enabled else 0.0

    cloudiness = params.base_cloudiness + intensity * (100.0 - params.base_cloudiness)
    return WeatherState(
        t=t,
        sun_altitude_deg=_sun_altitude(t, params),
        storm_intensity=float(np.clip(intensity, 0.0, 1.0)),
        cloudiness=float(np.clip(cloudiness, 0.0, 100.0)),
        precipitation=float(np.clip(100.0 * intensity, 0.0, 100.0)),
        precipitation_deposits=float(np.clip(90.0 * intensity, 0.0, 100.0)),
        storm_time_left=time_left,
    )


def initial_weather(params: WeatherParams = WeatherParams()) -> WeatherState:
    return WeatherState(
        t=0.0,
        sun_altitude_deg=_sun_altitude(0.0, params),
        cloudiness=params.base_cloudiness,
    )
