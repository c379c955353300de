"""Time-domain check of a mu verdict on the perturbation corners.

Each corner is a constant plant perturbation (thrust gain, roll/pitch inertia)
plus an injected input delay, flown in hover with a small step disturbance.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..dob import QFilterConfig
from ..sim.runner import run
from ..sim.scenario import Disturbance, ScenarioConfig

BOUND = 5.0  # m; position deviation treated as divergence
SETTLED = 0.01  # m; oscillation below this peak-to-peak counts as decayed


@dataclass(frozen=True)
class CornerResult:
    K: float
    J: float
    delay: float
    aborted: bool
    max_dev: float
    ptp_mid: float  # peak-to-peak position error, middle third of the run
    ptp_late: float  # peak-to-peak position error, last third

    @property
    def bounded(self) -> bool:
        return not self.aborted and self.max_dev < BOUND

    @property
    def sustained(self) -> bool:
        """Diverged, or kept oscillating without decaying."""
        if not self.bounded:
            return True
        return self.ptp_late > SETTLED and self.ptp_late >= 0.5 * self.ptp_mid


def corners(k_max=0.1, j_max=0.3, J_bar=0.82):
    return [(1 + sk * k_max, J_bar * (1 + sj * j_max)) for sk, sj in itertools.product((-1, 1), (-1, 1))]


def fly_corner(qcfg: QFilterConfig, K: float, J: float, delay: float = 0.1, duration: float = 60.0,
               template: ScenarioConfig | None = None) -> CornerResult:
    template = template or ScenarioConfig(converter="case2", trajectory="hover")
    cfg = template.evolve(dob="on", q_filter=qcfg, duration=duration, J=J, plant_gain=K,
                          input_delay=delay,
                          disturbance=Disturbance("step", force=(2.0, 2.0, 2.0), start=2.0))
    log = run(cfg)
    t = log["t"]
    if len(log) == 0:
        return CornerResult(K, J, delay, True, np.inf, np.inf, np.inf)
    err = np.linalg.norm(log["X"] - log["X_d"], axis=1)
    third = duration / 3.0
    mid = err[(t >= third) & (t < 2 * third)]
    late = err[t >= 2 * third]
    return CornerResult(K, J, delay, log.aborted, float(np.max(err)),
                        float(np.ptp(mid)) if mid.size else np.inf,
                        float(np.ptp(late)) if late.size else np.inf)


def corroborate(qcfg: QFilterConfig, delay: float = 0.1, duration: float = 60.0, k_max=0.1, j_max=0.3,
                J_bar=0.82) -> list[CornerResult]:
    return [fly_corner(qcfg, K, J, delay, duration) for K, J in corners(k_max, j_max, J_bar)]
