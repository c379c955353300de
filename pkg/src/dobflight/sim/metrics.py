"""Scalar summaries of run logs and the MOI comparison matrix."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .runner import AXES, RunLog, run
from .scenario import Disturbance, ScenarioConfig

DEFAULT_WINDOW_START = 5.0


class MetricsError(ValueError):
    pass


def _rms(a, axis=0):
    return np.sqrt(np.mean(np.square(a), axis=axis))


def metrics(log: RunLog, window_start: float = DEFAULT_WINDOW_START) -> dict[str, float]:
    """RMS errors over ``t >= window_start``.

    Keys: ``rms_pos_{x,y,z}``, ``rms_pos`` (RMS of the error norm),
    ``rms_acc_{x,y,z}``, ``max_pos_dev``,
    ``rms_dhat_err_{x,y,z}``, ``rms_dist_{x,y,z}`` and ``acc_cmd_rms``
    (RMS norm of the commanded acceleration, the scale used to normalize
    acceleration errors).  Position entries are NaN for runs without a
    position reference.
    """
    if len(log) == 0:
        raise MetricsError("log is empty")
    t = log["t"]
    if window_start >= t[-1]:
        raise MetricsError(f"analysis window start {window_start} s is beyond the log end {t[-1]:.3f} s")
    sel = t >= window_start
    out: dict[str, float] = {}
    pos_err = log["X"][sel] - log["X_d"][sel]
    acc_err = log["acc"][sel] - log["acc_d"][sel]
    dhat_err = log["d_hat"][sel] - log["d_injected"][sel]
    for i, a in enumerate(AXES):
        out[f"rms_pos_{a}"] = float(_rms(pos_err[:, i]))
        out[f"rms_acc_{a}"] = float(_rms(acc_err[:, i]))
        out[f"rms_dhat_err_{a}"] = float(_rms(dhat_err[:, i]))
        out[f"rms_dist_{a}"] = float(_rms(log["d_injected"][sel, i]))
    out["rms_pos"] = float(_rms(np.linalg.norm(pos_err, axis=1)))
    out["max_pos_dev"] = float(np.max(np.linalg.norm(pos_err, axis=1)))
    out["acc_cmd_rms"] = float(_rms(np.linalg.norm(log["acc_d"][sel], axis=1)))
    return out


@dataclass(frozen=True)
class MoiRow:
    scenario: str
    converter: str
    J: float
    rms_acc: tuple[float, float, float]
    acc_cmd_rms: float
    rms_pos: tuple[float, float, float]

    @property
    def z_rel(self) -> float:
        """Vertical acceleration error as a fraction of the commanded acceleration scale."""
        return self.rms_acc[2] / self.acc_cmd_rms


def _run_one(args):
    cfg, scenario, window, keep_log = args
    log = run(cfg)
    if log.aborted:
        raise RuntimeError(f"{scenario} {cfg.converter} J={cfg.J}: {log.abort_reason}")
    m = metrics(log, window)
    row = MoiRow(scenario, cfg.converter, float(cfg.J),
                 tuple(m[f"rms_acc_{a}"] for a in AXES), m["acc_cmd_rms"],
                 tuple(m[f"rms_pos_{a}"] for a in AXES))
    return (row, log) if keep_log else row


def moi_comparison(J_values=(0.1, 0.5, 1.0), template: ScenarioConfig | None = None,
                   scenarios=("accel_profile", "circle"), window_start: float = DEFAULT_WINDOW_START,
                   workers: int | None = None, keep_logs: bool = False) -> list:
    """Run {case1, case2} x J_values on each scenario, DOB absent, no disturbance.

    Only the plant inertia changes; the nominal model and gains stay fixed.
    With ``keep_logs`` each entry is a ``(MoiRow, RunLog)`` pair.
    """
    if not J_values or any(j <= 0 for j in J_values):
        raise ValueError("J values must be positive")
    template = template or ScenarioConfig(duration=30.0)
    jobs = []
    for scen in scenarios:
        for conv in ("case1", "case2"):
            for J in J_values:
                cfg = template.evolve(trajectory=scen, converter=conv, J=float(J), dob="absent",
                                      disturbance=Disturbance())
                jobs.append((cfg, scen, window_start, keep_logs))
    if workers == 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
