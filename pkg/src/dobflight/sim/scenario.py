"""Scenario configuration, reference trajectories and disturbance generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..conversion import PositionGains
from ..dob import QFilterConfig
from ..vehicle import VehicleParams

SINUSOID_CAP = 5.5  # m/s^2
PHASES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
HOVER_HEIGHT = 5.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Disturbance:
    """External force disturbance.

    kind ``none``; ``sinusoid`` (amplitude m/s^2, frequency Hz, axes);
    ``step`` (force vector N, start s); ``pull_release`` (force N,
    period s, axis, start s, lag s).
    """

    kind: str = "none"
    amplitude: float = 5.5
    frequency: float = 0.2
    axes: tuple[int, ...] = (0, 1, 2)
    force: tuple[float, float, float] = (6.0, 0.0, 0.0)
    start: float = 5.0
    period: float = 4.0
    axis: int = 0
    lag: float = 0.2

    def __post_init__(self):
        if self.kind not in ("none", "sinusoid", "step", "pull_release"):
            raise ConfigError(f"unknown disturbance kind {self.kind!r}")
        if self.kind == "sinusoid":
            if not 0 <= self.amplitude <= SINUSOID_CAP:
                raise ConfigError(f"sinusoid amplitude must be within [0, {SINUSOID_CAP}] m/s^2")
            if self.frequency <= 0:
                raise ConfigError("sinusoid frequency must be positive")
            if any(a not in (0, 1, 2) for a in self.axes):
                raise ConfigError("sinusoid axes must be drawn from 0, 1, 2")
        if self.kind == "pull_release" and (self.period <= 0 or self.lag <= 0):
            raise ConfigError("pull_release needs positive period and lag")
        if len(self.force) != 3:
            raise ConfigError("force must have three components")
        if self.axis not in (0, 1, 2):
            raise ConfigError("axis must be 0, 1 or 2")


@dataclass(frozen=True)
class ScenarioConfig:
    converter: str = "case2"
    dob: str = "on"  # on | off (estimate only) | absent
    q_filter: QFilterConfig = field(default_factory=QFilterConfig)
    trajectory: str = "hover"  # hover | circle | accel_profile
    disturbance: Disturbance = field(default_factory=Disturbance)
    duration: float = 30.0
    J: float | None = None  # roll/pitch inertia of the plant only
    seed: int = 0
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    gains: PositionGains = field(default_factory=PositionGains)
    circle_radius: float = 3.0
    circle_period: float = 12.0
    physics_dt: float = 0.001
    control_substeps: int = 4  # physics steps per control tick (250 Hz)
    dob_warmup: float = 0.5
    accel_noise: float = 0.0  # std of accelerometer noise, m/s^2
    plant_gain: float = 1.0  # multiplies realized thrust
    input_delay: float = 0.0  # s, transport delay on the command set

    def __post_init__(self):
        if self.converter not in ("case1", "case2"):
            raise ConfigError(f"unknown converter {self.converter!r}")
        if self.dob not in ("on", "off", "absent"):
            raise ConfigError(f"dob must be on, off or absent, got {self.dob!r}")
        if self.trajectory not in ("hover", "circle", "accel_profile"):
            raise ConfigError(f"unknown trajectory {self.trajectory!r}")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.J is not None and self.J <= 0:
            raise ConfigError("J override must be positive")
        if self.physics_dt <= 0 or self.control_substeps < 1:
            raise ConfigError("invalid time step configuration")
        if self.circle_period <= 0:
            raise ConfigError("circle period must be positive")
        if self.plant_gain <= 0 or self.input_delay < 0 or self.accel_noise < 0:
            raise ConfigError("invalid plant perturbation")

    @property
    def control_dt(self) -> float:
        return self.physics_dt * self.control_substeps

    def plant_params(self) -> VehicleParams:
        return self.vehicle if self.J is None else self.vehicle.with_inertia(self.J)

    def evolve(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def circle_reference(t: float, radius: float = 3.0, height: float = HOVER_HEIGHT, period: float = 12.0):
    """Horizontal circle at altitude ``height`` (NED, so z = -height)."""
    if period <= 0:
        raise ValueError("period must be positive")
    w = 2.0 * math.pi / period
    c, s = math.cos(w * t), math.sin(w * t)
    X = np.array([radius * c, radius * s, -height])
    V = np.array([-radius * w * s, radius * w * c, 0.0])
    A = np.array([-radius * w * w * c, -radius * w * w * s, 0.0])
    return X, V, A


def hover_reference(t: float, height: float = HOVER_HEIGHT):
    return np.array([0.0, 0.0, -height]), np.zeros(3), np.zeros(3)


# (amplitude m/s^2, frequency Hz, phase rad) per axis
ACCEL_PROFILE = (
    ((2.0, 0.25, 0.0), (0.8, 0.6, 1.0)),
    ((1.5, 0.15, 0.5), (0.8, 0.45, 2.0)),
    ((0.8, 0.1, 0.0),),
)


def accel_profile(t: float) -> np.ndarray:
    """Smooth multi-sine acceleration command, within the per-axis limit."""
    out = np.zeros(3)
    for i, comps in enumerate(ACCEL_PROFILE):
        out[i] = sum(a * math.sin(2.0 * math.pi * f * t + ph) for a, f, ph in comps)
    return out


def _pull_release_level(t: float, d: Disturbance) -> float:
    """Square wave (on for the first half period) through a first-order lag."""
    if t < d.start:
        return 0.0
    tau = t - d.start
    half = 0.5 * d.period
    a = math.exp(-half / d.lag)
    n = int(tau // d.period)
    # value at the start of cycle n, from the cycle-to-cycle recursion
    v_n = a / (1.0 + a) * (1.0 - a ** (2 * n))
    r = tau - n * d.period
    if r < half:
        return 1.0 - (1.0 - v_n) * math.exp(-r / d.lag)
    v_on = 1.0 - (1.0 - v_n) * a
    return v_on * math.exp(-(r - half) / d.lag)


def disturbance_signal(d: Disturbance, t: float, m: float = 3.24) -> np.ndarray:
    """Disturbance force (N, earth frame) at time ``t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    out = np.zeros(3)
    if d.kind == "none":
        return out
    if d.kind == "sinusoid":
        w = 2.0 * math.pi * d.frequency
        for ax in d.axes:
            out[ax] = m * d.amplitude * math.sin(w * t + PHASES[ax])
        return out
    if d.kind == "step":
        if t >= d.start:
            out[:] = d.force
        return out
    if d.kind == "pull_release":
        out[d.axis] = d.force[d.axis] * _pull_release_level(t, d)
        return out
    raise ConfigError(f"unknown disturbance kind {d.kind!r}")
