"""Closed-loop simulation: outer loop, converter, DOB, attitude loop, plant."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..conversion import (ConversionError, PseudoAccel, convert_case1, convert_case2,
                          position_controller)
from ..dob import DobState, applied_compensation, build_nominal, estimate_eid
from ..vehicle import VehicleAbort, _euler_rates, rk4_array
from .scenario import (ScenarioConfig, accel_profile, circle_reference, disturbance_signal,
                       hover_reference)

# (name, width) in CSV order
COLUMNS = (
    ("t", 1), ("X", 3), ("X_d", 3), ("acc", 3), ("acc_d", 3), ("q", 3), ("q_d", 3),
    ("T_t", 1), ("F_d", 3), ("Ft_d", 3), ("d_injected", 3), ("d_hat", 3),
)
AXES = "xyz"


def column_names() -> list[str]:
    names = []
    for name, width in COLUMNS:
        if width == 1:
            names.append(name)
        else:
            names.extend(f"{name}_{a}" for a in AXES)
    return names


@dataclass
class RunLog:
    """Control-rate time series; ``acc`` is the mean acceleration over each tick."""

    data: dict[str, np.ndarray]
    control_dt: float
    abort_reason: str | None = None
    config: ScenarioConfig | None = field(default=None, repr=False)

    def __getitem__(self, key) -> np.ndarray:
        return self.data[key]

    def __len__(self) -> int:
        return len(self.data["t"])

    @property
    def aborted(self) -> bool:
        return self.abort_reason is not None

    def as_matrix(self) -> np.ndarray:
        cols = []
        for name, width in COLUMNS:
            a = self.data[name]
            cols.append(a.reshape(len(self), width))
        return np.hstack(cols)


def _reference(cfg: ScenarioConfig, t: float):
    if cfg.trajectory == "circle":
        return circle_reference(t, cfg.circle_radius, period=cfg.circle_period)
    return hover_reference(t)


def run(cfg: ScenarioConfig) -> RunLog:
    """Simulate one scenario; a vehicle abort returns the log truncated at the abort."""
    nominal_p = cfg.vehicle
    plant = cfg.plant_params()
    m, g = nominal_p.m, nominal_p.g
    P = plant.P_gain
    D = plant.D_gain
    dt = cfg.physics_dt
    Tc = cfg.control_dt
    n_ticks = int(round(cfg.duration / Tc))
    rng = np.random.default_rng(cfg.seed)

    X0, V0, _ = _reference(cfg, 0.0)
    x = [*X0.tolist(), *V0.tolist(), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]

    dob = None
    if cfg.dob != "absent":
        dob = DobState(build_nominal(nominal_p), cfg.q_filter, Tc, m,
                       accel_limit=cfg.gains.limit, warmup=cfg.dob_warmup)

    delay_ticks = int(round(cfg.input_delay / Tc))
    hover_cmd = (0.0, 0.0, m * g)
    cmd_buffer = deque([hover_cmd] * delay_ticks)

    cols = {name: np.full((n_ticks, w) if w > 1 else n_ticks, np.nan) for name, w in COLUMNS}
    F_cmd_prev = np.array([0.0, 0.0, -m * g])
    acc_prev = np.zeros(3)
    qd_prev = None
    abort = None
    k_done = 0

    for k in range(n_ticks):
        t = k * Tc
        X = np.array(x[0:3])
        V = np.array(x[3:6])
        psi = x[8]

        if cfg.trajectory == "accel_profile":
            X_d = np.full(3, np.nan)
            acc_d = accel_profile(t)
        else:
            X_d, V_d, A_ref = _reference(cfg, t)
            acc_d = position_controller(X_d, V_d, X, V, cfg.gains, A_ref)
        F_d = m * (acc_d - np.array([0.0, 0.0, g]))

        d_hat = np.zeros(3)
        Ft_d = F_d
        if dob is not None:
            a_meas = acc_prev
            if cfg.accel_noise > 0:
                a_meas = a_meas + rng.normal(0.0, cfg.accel_noise, 3)
            F_meas = m * (a_meas - np.array([0.0, 0.0, g]))
            d_hat = estimate_eid(dob, F_meas, F_cmd_prev, psi).copy()
            if cfg.dob == "on":
                Ft_d = F_d - applied_compensation(dob)

        # derotate into the pseudo-acceleration frame
        c, s = math.cos(psi), math.sin(psi)
        fx, fy, fz = Ft_d / m
        a_d = PseudoAccel(c * fx + s * fy, -s * fx + c * fy, fz)
        try:
            if cfg.converter == "case1":
                r = convert_case1(a_d, m)
            else:
                r = convert_case2(a_d, x[6], x[7], m)
        except ConversionError as exc:
            abort = f"conversion failed at t={t:.3f}: {exc}"
            break

        cmd_buffer.append((r.theta_d, r.phi_d, r.T_d))
        theta_d, phi_d, T_d = cmd_buffer.popleft()
        q_d = (phi_d, theta_d, 0.0)
        if qd_prev is None:
            qd_prev = q_d
        qdot_d = tuple((a - b) / Tc for a, b in zip(q_d, qd_prev))
        qd_prev = q_d
        T = cfg.plant_gain * T_d

        V_start = x[3:6]
        q_now = x[6:9]
        try:
            for j in range(cfg.control_substeps):
                tj = t + j * dt
                d = tuple(disturbance_signal(cfg.disturbance, tj, m).tolist())
                rates = _euler_rates(x[6], x[7], x[9], x[10], x[11])
                tr = tuple(P[i] * (q_d[i] - x[6 + i]) + D[i] * (qdot_d[i] - rates[i])
                           for i in range(3))
                x = rk4_array(x, tr, T, d, plant, dt)
        except VehicleAbort as exc:
            abort = f"t={t:.3f}: {exc}"
            break
        if not all(math.isfinite(v) for v in x):
            abort = f"t={t:.3f}: state diverged"
            break
        acc_prev = (np.array(x[3:6]) - np.array(V_start)) / Tc

        cols["t"][k] = t
        cols["X"][k] = X
        cols["X_d"][k] = X_d
        cols["acc"][k] = acc_prev
        cols["acc_d"][k] = acc_d
        cols["q"][k] = q_now
        cols["q_d"][k] = q_d
        cols["T_t"][k] = T
        cols["F_d"][k] = F_d
        cols["Ft_d"][k] = Ft_d
        cols["d_injected"][k] = disturbance_signal(cfg.disturbance, t, m)
        cols["d_hat"][k] = d_hat
        F_cmd_prev = Ft_d
        k_done = k + 1

    data = {name: arr[:k_done] for name, arr in cols.items()}
    return RunLog(data, Tc, abort, cfg)


def write_log_csv(log: RunLog, path) -> Path:
    """Write the log with a header row in :data:`COLUMNS` order."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(column_names())
        for row in log.as_matrix():
            w.writerow([repr(float(v)) for v in row])
    return path
