"""Robust-stability verdicts for a Q-filter time constant, and tau sweeps."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dob import QFilterConfig, q_horizontal, q_vertical
from ..linsys import freq_eval, log_grid
from .mu import assemble_m11, mu_upper_bound_batch
from .weights import UncertaintyModel

CHANNELS = ("xy", "z")
BISECT_RTOL = 1e-4


class BoundaryNotBracketed(ValueError):
    """The stable/unstable transition does not lie inside the swept range."""


def _check_channel(channel):
    if channel not in CHANNELS:
        raise ValueError(f"channel must be xy or z, got {channel!r}")


def q_filter(channel: str, tau: float, qcfg: QFilterConfig | None = None):
    _check_channel(channel)
    if tau <= 0:
        raise ValueError("tau must be positive")
    qcfg = qcfg or QFilterConfig()
    if channel == "xy":
        return q_horizontal(tau, qcfg.zeta, qcfg.form)
    return q_vertical(tau)


def m11_stack(channel: str, tau: float, u: UncertaintyModel, grid, qcfg=None) -> np.ndarray:
    """M11 at every grid frequency, shape (n, 3, 3) for xy and (n, 2, 2) for z."""
    grid = np.asarray(grid, dtype=float)
    q = freq_eval(q_filter(channel, tau, qcfg), grid)
    wj = u.w_j(grid, channel) if channel == "xy" else None
    return assemble_m11(q, u.w_delta(grid), u.w_k(grid), wj)


@dataclass(frozen=True)
class MuResult:
    grid: np.ndarray
    mu_upper: np.ndarray
    peak: float
    stable: bool
    converged: bool
    peak_omega: float
    log_scales: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SgtResult:
    grid: np.ndarray
    product: np.ndarray  # |Q| * W_l per frequency
    peak: float
    stable: bool


def check_stability(channel: str, tau: float, u: UncertaintyModel | None = None, grid=None,
                    qcfg: QFilterConfig | None = None, x0=None) -> MuResult:
    """mu-test: stable iff the upper bound stays below 1 on the whole grid."""
    u = u or UncertaintyModel()
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    bound = mu_upper_bound_batch(m11_stack(channel, tau, u, grid, qcfg), x0=x0)
    i = int(np.argmax(bound.value))
    peak = float(bound.value[i])
    return MuResult(grid, bound.value, peak, peak < 1.0, bool(bound.converged.all()),
                    float(grid[i]), bound.log_scales)


def lumped_weight(channel: str, u: UncertaintyModel, grid) -> np.ndarray:
    """Single multiplicative bound ``(1+w_J)(1+w_K)(1+w_delta) - 1``."""
    grid = np.asarray(grid, dtype=float)
    return (1 + u.w_j(grid, channel)) * (1 + u.w_k(grid)) * (1 + u.w_delta(grid)) - 1


def sgt_check(channel: str, tau: float, u: UncertaintyModel | None = None, grid=None,
              qcfg: QFilterConfig | None = None) -> SgtResult:
    """Small-gain test: stable iff ``|Q(jw)| W_l(w) < 1`` on the whole grid."""
    u = u or UncertaintyModel()
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    prod = np.abs(freq_eval(q_filter(channel, tau, qcfg), grid)) * lumped_weight(channel, u, grid)
    peak = float(np.max(prod))
    return SgtResult(grid, prod, peak, peak < 1.0)


@dataclass(frozen=True)
class SweepRow:
    tau: float
    peak_mu: float
    peak_sgt: float
    stable_mu: bool
    stable_sgt: bool
    converged: bool


@dataclass(frozen=True)
class SweepResult:
    channel: str
    rows: tuple[SweepRow, ...]
    tau_mu: float | None
    tau_sgt: float | None
    errors: dict[str, str]

    def boundary(self, criterion: str) -> float:
        tau = self.tau_mu if criterion == "mu" else self.tau_sgt
        if tau is None:
            raise BoundaryNotBracketed(self.errors[criterion])
        return tau


def _bisect(is_stable, lo, hi):
    """Smallest stable tau in (lo, hi], given lo unstable and hi stable."""
    while hi - lo > BISECT_RTOL * hi:
        mid = np.sqrt(lo * hi)
        if is_stable(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def _bracket(taus, stable, criterion):
    unstable_idx = [i for i, s in enumerate(stable) if not s]
    if not unstable_idx:
        raise BoundaryNotBracketed(
            f"{criterion}: stable over the whole range; boundary below {taus[0]:g}")
    i = unstable_idx[-1]
    if i == len(taus) - 1:
        raise BoundaryNotBracketed(
            f"{criterion}: unstable at the top of the range; boundary above {taus[-1]:g}")
    return float(taus[i]), float(taus[i + 1])


def tau_sweep(channel: str, tau_range=(0.02, 0.5), steps: int = 25, u: UncertaintyModel | None = None,
              grid=None, qcfg: QFilterConfig | None = None, strict: bool = False) -> SweepResult:
    """Peak mu and SGT product on a log-spaced tau grid, then bisect each boundary.

    The boundary is the smallest stable tau above the largest unstable grid
    point.  A criterion with no transition in range has ``None`` as its
    boundary and a message in ``errors``; ``strict=True`` raises instead.
    """
    _check_channel(channel)
    lo, hi = tau_range
    if not 0 < lo < hi:
        raise ValueError("tau range must be positive and increasing")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    u = u or UncertaintyModel()
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    taus = np.geomspace(lo, hi, steps)

    rows = []
    x = None
    for tau in taus:
        r = check_stability(channel, tau, u, grid, qcfg, x0=x)
        x = r.log_scales
        s = sgt_check(channel, tau, u, grid, qcfg)
        rows.append(SweepRow(float(tau), r.peak, s.peak, r.stable, s.stable, r.converged))

    out = {}
    errors = {}
    for crit in ("mu", "sgt"):
        try:
            a, b = _bracket(taus, [getattr(row, f"stable_{crit}") for row in rows], crit)
        except BoundaryNotBracketed as exc:
            if strict:
                raise
            out[crit] = None
            errors[crit] = str(exc)
            continue
        if crit == "mu":
            out[crit] = _bisect(lambda t: check_stability(channel, t, u, grid, qcfg).stable, a, b)
        else:
            out[crit] = _bisect(lambda t: sgt_check(channel, t, u, grid, qcfg).stable, a, b)
    return SweepResult(channel, tuple(rows), out["mu"], out["sgt"], errors)


def write_sweep_csv(result: SweepResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "peak_mu", "peak_sgt", "stable_mu", "stable_sgt"])
        for r in result.rows:
            w.writerow([repr(r.tau), repr(r.peak_mu), repr(r.peak_sgt), int(r.stable_mu), int(r.stable_sgt)])
    return path


def write_curves_csv(mu: MuResult, sgt: SgtResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "mu_upper", "sgt_product"])
        for om, m, s in zip(mu.grid, mu.mu_upper, sgt.product):
            w.writerow([repr(float(om)), repr(float(m)), repr(float(s))])
    return path
