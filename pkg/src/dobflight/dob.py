"""Disturbance observer on the translational force channels.

Per channel the estimate is::

    d_hat = Q1 Pn^-1 F_meas - Q2 F_cmd_prev

Only the proper products ``Q1 Pn^-1`` and ``Q2`` are discretized; the inverse
nominal model alone is never realized.  Channels live in the yaw-derotated
frame: X is driven by pitch, Y by roll, Z by thrust.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linsys import TransferFunction, discretize_bilinear
from .vehicle import VehicleParams, yaw_matrix


@dataclass(frozen=True)
class NominalModel:
    channels: tuple[TransferFunction, TransferFunction, TransferFunction]

    def __getitem__(self, i):
        return self.channels[i]


@dataclass(frozen=True)
class QFilterConfig:
    """Q-filter time constants and damping.

    ``form="compact"`` gives ``1/((tau s)^2 + zeta tau s + 1)``; ``"standard"``
    uses ``2 zeta`` in the middle term so ``zeta`` is the usual damping ratio.
    """

    tau1: float = 0.15
    tau2: float = 0.12
    zeta: float = 0.707
    form: str = "compact"

    def __post_init__(self):
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ValueError("Q-filter time constants must be positive")
        if self.zeta <= 0:
            raise ValueError("Q-filter damping must be positive")
        if self.form not in ("compact", "standard"):
            raise ValueError(f"unknown Q-filter form {self.form!r}")


def q_horizontal(tau: float, zeta: float = 0.707, form: str = "compact") -> TransferFunction:
    c = zeta if form == "compact" else 2.0 * zeta
    return TransferFunction((1.0,), (tau * tau, c * tau, 1.0))


def q_vertical(tau: float) -> TransferFunction:
    return TransferFunction((1.0,), (tau, 1.0))


def build_nominal(p: VehicleParams) -> NominalModel:
    """Nominal plant per channel: attitude closed loops for X/Y, unity for Z."""
    # X is realized through pitch (axis 1), Y through roll (axis 0)
    chans = []
    for axis in (1, 0):
        J, P, D = p.J[axis], p.P_gain[axis], p.D_gain[axis]
        if min(J, P, D) <= 0:
            raise ValueError("nominal inertia and attitude gains must be positive")
        chans.append(TransferFunction((D, P), (J, D, P)))
    chans.append(TransferFunction.constant(1.0))
    return NominalModel(tuple(chans))


def build_q_filters(cfg: QFilterConfig) -> tuple[TransferFunction, TransferFunction, TransferFunction]:
    qh = q_horizontal(cfg.tau1, cfg.zeta, cfg.form)
    return (qh, qh, q_vertical(cfg.tau2))


class DobState:
    """Filter states of the estimator plus its last output.

    ``accel_limit`` bounds the *applied* compensation per axis (in m/s^2,
    scaled by mass); ``warmup`` ramps the applied compensation in linearly
    from zero.  The raw estimate is never clamped.
    """

    def __init__(self, nominal: NominalModel, qcfg: QFilterConfig, dt: float, m: float,
                 accel_limit: float = 3.0, warmup: float = 0.5):
        self.nominal = nominal
        self.qcfg = qcfg
        self.dt = dt
        self.m = m
        self.limit = m * accel_limit
        self.warmup = warmup
        q1 = build_q_filters(qcfg)
        self.q1 = q1
        self.inv_filters = [discretize_bilinear(q * nominal[i].inverse(), dt) for i, q in enumerate(q1)]
        self.q2_filters = [discretize_bilinear(q, dt) for q in q1]
        self.d_hat = np.zeros(3)
        self.t = 0.0

    def reset(self):
        for f in self.inv_filters + self.q2_filters:
            f.reset()
        self.d_hat = np.zeros(3)
        self.t = 0.0


def estimate_eid(state: DobState, F_meas, F_cmd_prev, psi: float = 0.0) -> np.ndarray:
    """Step the estimator one control tick and return ``d_hat`` in the earth frame.

    ``F_meas`` is ``m (acc_meas - g e_z)``; ``F_cmd_prev`` is the compensated
    force command that was applied over the tick just ended.
    """
    Rt = yaw_matrix(psi).T
    f = Rt @ np.asarray(F_meas, dtype=float)
    fc = Rt @ np.asarray(F_cmd_prev, dtype=float)
    d = np.empty(3)
    for i in range(3):
        d[i] = state.inv_filters[i].step(f[i]) - state.q2_filters[i].step(fc[i])
    state.d_hat = yaw_matrix(psi) @ d
    state.t += state.dt
    return state.d_hat


def applied_compensation(state: DobState) -> np.ndarray:
    """Clamped, warm-up-ramped estimate that is actually subtracted from the command."""
    ramp = 1.0 if state.warmup <= 0 else min(1.0, state.t / state.warmup)
    return ramp * np.clip(state.d_hat, -state.limit, state.limit)


def compensate(F_d, d_hat) -> np.ndarray:
    return np.asarray(F_d, dtype=float) - np.asarray(d_hat, dtype=float)
