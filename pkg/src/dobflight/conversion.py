"""Desired force/acceleration to the command set (pitch, roll, total thrust).

Two converters share the attitude part.  ``convert_case1`` computes thrust
from the commanded attitude; ``convert_case2`` computes it from the measured
attitude so the vertical force is right *now*, while the commanded tilt is
still being realized by the attitude loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vehicle import thrust_direction, yaw_matrix

FREEFALL_MARGIN = 0.5  # m/s^2; z-pseudo-acceleration must be at most -FREEFALL_MARGIN
MIN_TILT_COSINE = 0.1
ACCEL_LIMIT = 3.0  # m/s^2 per axis


class ConversionError(ValueError):
    pass


@dataclass(frozen=True)
class PseudoAccel:
    """Yaw-derotated, gravity-removed acceleration (m/s^2)."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "PseudoAccel":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class CommandSet:
    theta_d: float
    phi_d: float
    T_d: float

    def __post_init__(self):
        if self.T_d < 0:
            raise ValueError("thrust command must be nonnegative")


def pseudo_accel_from_force(F, psi: float, m: float) -> PseudoAccel:
    if m <= 0:
        raise ValueError("mass must be positive")
    a = yaw_matrix(psi).T @ (np.asarray(F, dtype=float) / m)
    return PseudoAccel.from_array(a)


def accel_from_r(r: CommandSet, m: float) -> PseudoAccel:
    """Forward map: pseudo-acceleration produced by a realized command set."""
    if m <= 0:
        raise ValueError("mass must be positive")
    h = thrust_direction((r.phi_d, r.theta_d, 0.0))
    return PseudoAccel.from_array(-h * r.T_d / m)


def _attitude(a: PseudoAccel) -> tuple[float, float]:
    if a.z > -FREEFALL_MARGIN:
        raise ConversionError(
            f"vertical pseudo-acceleration {a.z:.3f} m/s^2 is too close to free fall; "
            "clamp the acceleration command")
    theta = math.atan(a.x / a.z)
    phi = math.atan(-a.y * math.cos(theta) / a.z)
    return theta, phi


def convert_case1(a_d: PseudoAccel, m: float) -> CommandSet:
    """Kinematic inversion: thrust from the commanded attitude."""
    theta, phi = _attitude(a_d)
    T = m * math.sqrt(a_d.x ** 2 + a_d.y ** 2 + a_d.z ** 2)
    return CommandSet(theta, phi, T)


def convert_case2(a_d: PseudoAccel, phi_meas: float, theta_meas: float, m: float) -> CommandSet:
    """Thrust from the measured attitude, attitude commands as in case 1."""
    theta, phi = _attitude(a_d)
    c = math.cos(phi_meas) * math.cos(theta_meas)
    if c < MIN_TILT_COSINE:
        raise ConversionError(f"measured tilt too large (cos(phi)cos(theta) = {c:.3f})")
    return CommandSet(theta, phi, -m * a_d.z / c)


def desired_force(acc_d, m: float, g: float = 9.81) -> np.ndarray:
    """``F_d = m (acc_d - g e_z)`` in the earth frame."""
    a = np.asarray(acc_d, dtype=float)
    return m * (a - np.array([0.0, 0.0, g]))


@dataclass(frozen=True)
class PositionGains:
    kp: float = 0.4
    kd: float = 0.45
    limit: float = ACCEL_LIMIT

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValueError("position gains must be nonnegative")
        if self.limit <= 0:
            raise ValueError("acceleration limit must be positive")


def position_controller(X_d, V_d, X, V, gains: PositionGains = PositionGains(), acc_ref=None) -> np.ndarray:
    """Outer PD loop with feedforward, clamped per axis to the acceleration limit."""
    acc = gains.kp * (np.asarray(X_d, float) - np.asarray(X, float)) \
        + gains.kd * (np.asarray(V_d, float) - np.asarray(V, float))
    if acc_ref is not None:
        acc = acc + np.asarray(acc_ref, dtype=float)
    return np.clip(acc, -gains.limit, gains.limit)
