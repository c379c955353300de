"""Rigid-body multirotor plant with a PD attitude loop.

Frames: earth-fixed NED (gravity +z), body thrust along -z_body.
Attitude is ZYX Euler (roll, pitch, yaw); body rates are (p, q, r).

The flat state vector used by the integrator is::

    [x, y, z, vx, vy, vz, roll, pitch, yaw, p, q, r]
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GIMBAL_LIMIT = 1.45  # rad, pitch magnitude at which the Euler kinematics are abandoned


class VehicleAbort(RuntimeError):
    """The simulated vehicle left the valid attitude envelope."""


@dataclass(frozen=True)
class VehicleParams:
    m: float = 3.24
    J: tuple[float, float, float] = (0.82, 0.82, 1.49)
    P_gain: tuple[float, float, float] = (3.0, 3.0, 3.0)
    D_gain: tuple[float, float, float] = (1.0, 1.0, 1.0)
    g: float = 9.81

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(float(v) for v in self.J))
        object.__setattr__(self, "P_gain", tuple(float(v) for v in self.P_gain))
        object.__setattr__(self, "D_gain", tuple(float(v) for v in self.D_gain))
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if len(self.J) != 3 or min(self.J) <= 0:
            raise ValueError("inertia must have three positive diagonal entries")
        if len(self.P_gain) != 3 or len(self.D_gain) != 3:
            raise ValueError("attitude gains need one value per axis")

    @property
    def inertia_matrix(self) -> np.ndarray:
        return np.diag(self.J)

    def with_inertia(self, j_rp: float) -> "VehicleParams":
        """Copy with roll/pitch inertia replaced (yaw inertia kept)."""
        return VehicleParams(self.m, (j_rp, j_rp, self.J[2]), self.P_gain, self.D_gain, self.g)


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    return a


@dataclass(frozen=True)
class VehicleState:
    X: np.ndarray = field(default_factory=lambda: np.zeros(3))
    V: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("X", "V", "q", "Omega"):
            object.__setattr__(self, name, _vec3(getattr(self, name)))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.X, self.V, self.q, self.Omega])

    @classmethod
    def from_array(cls, x) -> "VehicleState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3], x[3:6], x[6:9], x[9:12])


@dataclass(frozen=True)
class ControlInput:
    T_r: tuple[float, float, float] = (0.0, 0.0, 0.0)
    T_t: float = 0.0

    def __post_init__(self):
        if self.T_t < 0:
            raise ValueError("total thrust must be nonnegative")


def thrust_direction(q) -> np.ndarray:
    """Unit vector h(roll, pitch) with earth-frame force ``-R(yaw) h T``."""
    phi, theta = float(q[0]), float(q[1])
    cphi = math.cos(phi)
    return np.array([cphi * math.sin(theta), -math.sin(phi), cphi * math.cos(theta)])


def rotation_matrix(q) -> np.ndarray:
    """Body-to-earth rotation for ZYX Euler angles."""
    phi, theta, psi = (float(v) for v in q)
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array([
        [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
        [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
        [-st, ct * sf, ct * cf],
    ])


def yaw_matrix(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_rates(q, Omega) -> np.ndarray:
    phi, theta, _ = (float(v) for v in q)
    p, qr, r = (float(v) for v in Omega)
    return np.array(_euler_rates(phi, theta, p, qr, r))


def _euler_rates(phi, theta, p, q, r):
    sf, cf = math.sin(phi), math.cos(phi)
    ct = math.cos(theta)
    a = q * sf + r * cf
    return p + a * math.sin(theta) / ct, q * cf - r * sf, a / ct


def _derivative(x, tr, T, d, m, J, g):
    """State derivative on plain floats; the hot path of the integrator."""
    phi, theta, psi = x[6], x[7], x[8]
    p, q, r = x[9], x[10], x[11]
    if abs(theta) > GIMBAL_LIMIT or abs(phi) > GIMBAL_LIMIT:
        raise VehicleAbort(f"attitude out of envelope: roll={phi:.3f}, pitch={theta:.3f} rad")
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    # earth force = R(q) [0, 0, -T]
    fx = -T * (cp * st * cf + sp * sf) + d[0]
    fy = -T * (sp * st * cf - cp * sf) + d[1]
    fz = -T * (ct * cf) + d[2]
    J1, J2, J3 = J
    # J dOmega = T_r - Omega x J Omega
    dp = (tr[0] - (q * J3 * r - r * J2 * q)) / J1
    dq = (tr[1] - (r * J1 * p - p * J3 * r)) / J2
    dr = (tr[2] - (p * J2 * q - q * J1 * p)) / J3
    a = q * sf + r * cf
    return [
        x[3], x[4], x[5],
        fx / m, fy / m, fz / m + g,
        p + a * st / ct, q * cf - r * sf, a / ct,
        dp, dq, dr,
    ]


def dynamics_derivative(s: VehicleState, u: ControlInput, d_force, p: VehicleParams) -> VehicleState:
    """Time derivative of the full nonlinear rigid-body model.

    The returned object reuses the :class:`VehicleState` layout:
    ``X`` holds velocity, ``V`` acceleration, ``q`` Euler rates, ``Omega``
    angular acceleration.
    """
    dx = _derivative(s.as_array().tolist(), tuple(u.T_r), float(u.T_t),
                     tuple(float(v) for v in d_force), p.m, p.J, p.g)
    return VehicleState.from_array(dx)


def attitude_pd(q_d, s: VehicleState, p: VehicleParams, qdot_d=None) -> np.ndarray:
    """Per-axis PD torque ``P (q_d - q) + D (qdot_d - qdot)``.

    ``qdot_d`` is the rate of the commanded attitude; omitted means zero,
    which turns the derivative term into pure rate damping.
    """
    q_d = _vec3(q_d)
    qdot = euler_rates(s.q, s.Omega)
    qdot_d = np.zeros(3) if qdot_d is None else _vec3(qdot_d)
    P = np.asarray(p.P_gain)
    D = np.asarray(p.D_gain)
    return P * (q_d - s.q) + D * (qdot_d - qdot)


def rk4_array(x, tr, T, d, p: VehicleParams, dt: float) -> list:
    """One classical RK4 step on a flat state list with inputs held constant."""
    m, J, g = p.m, p.J, p.g
    k1 = _derivative(x, tr, T, d, m, J, g)
    h = 0.5 * dt
    x2 = [xi + h * ki for xi, ki in zip(x, k1)]
    k2 = _derivative(x2, tr, T, d, m, J, g)
    x3 = [xi + h * ki for xi, ki in zip(x, k2)]
    k3 = _derivative(x3, tr, T, d, m, J, g)
    x4 = [xi + dt * ki for xi, ki in zip(x, k3)]
    k4 = _derivative(x4, tr, T, d, m, J, g)
    c = dt / 6.0
    return [xi + c * (a + 2.0 * b + 2.0 * cc + e)
            for xi, a, b, cc, e in zip(x, k1, k2, k3, k4)]


def step_rk4(s: VehicleState, u: ControlInput, d_force, p: VehicleParams, dt: float) -> VehicleState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = rk4_array(s.as_array().tolist(), tuple(float(v) for v in u.T_r), float(u.T_t),
                  tuple(float(v) for v in d_force), p, dt)
    return VehicleState.from_array(x)


def hover_thrust(p: VehicleParams) -> float:
    return p.m * p.g


def attitude_closed_loop_tf(p: VehicleParams, axis: int = 1):
    """Linear closed loop from commanded to realized angle, ``(Ds+P)/(Js^2+Ds+P)``."""
    from .linsys import TransferFunction

    J, P, D = p.J[axis], p.P_gain[axis], p.D_gain[axis]
    return TransferFunction((D, P), (J, D, P))
