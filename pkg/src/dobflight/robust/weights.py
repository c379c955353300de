"""Uncertainty weights for the DOB loop and the model that bundles them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linsys import FrequencyResponse, TransferFunction, freq_eval

J_GRID_POINTS = 61
RATIONAL_DELTA_MAX = 0.12  # delay bound the rational fit was made for
ENVELOPE_SLACK = 0.01


def w_delta_exact(delta_max: float, omega) -> np.ndarray:
    """``max_{|d| <= delta_max} |exp(-j w d) - 1|``: 2|sin(w delta_max / 2)| up to w delta_max = pi, then 2."""
    if delta_max < 0:
        raise ValueError("delay bound must be nonnegative")
    w = np.asarray(omega, dtype=float)
    x = w * delta_max
    return np.where(x <= np.pi, 2.0 * np.abs(np.sin(0.5 * x)), 2.0)


def w_delta_rational() -> TransferFunction:
    """Third-order rational upper bound of the delay envelope for a 0.12 s bound."""
    return TransferFunction((2.015, 52.88, 431.6, 0.415), (1.0, 36.7, 606.8, 3521.0))


def w_j_envelope(J_bar: float, j_max: float, P: float, D: float, grid, form: str = "pd",
                 i_gain: float = 0.0, n: int = J_GRID_POINTS) -> FrequencyResponse:
    """Worst-case relative change of the attitude closed loop over the inertia error range.

    ``form="pd"`` is ``-J J_d s^2 / (J(1+J_d)s^2 + Ds + P)``, the exact relative
    error of the PD loop.  ``form="pid"`` is the PID-shaped variant
    ``-J J_d s^3 / (J(1+J_d)s^3 + Ds^2 + Ps + I)``; with ``i_gain = 0`` the two coincide.
    """
    if J_bar <= 0:
        raise ValueError("nominal inertia must be positive")
    if not 0 <= j_max < 1:
        raise ValueError("inertia error bound must lie in [0, 1)")
    if form not in ("pd", "pid"):
        raise ValueError(f"unknown W_J form {form!r}")
    w = np.asarray(grid, dtype=float)
    s = 1j * w
    out = np.zeros_like(w)
    for jd in np.linspace(-j_max, j_max, n):
        if form == "pd":
            v = -J_bar * jd * s ** 2 / (J_bar * (1 + jd) * s ** 2 + D * s + P)
        else:
            v = -J_bar * jd * s ** 3 / (J_bar * (1 + jd) * s ** 3 + D * s ** 2 + P * s + i_gain)
        out = np.maximum(out, np.abs(v))
    return FrequencyResponse(w, out.astype(complex))


@dataclass(frozen=True)
class UncertaintyModel:
    """Delay, gain and inertia uncertainty bounds plus the weight choices.

    ``delta_weight`` selects the rational fit or the exact envelope for the
    delay weight; ``wj_form`` selects the inertia-weight shape (see
    :func:`w_j_envelope`).  Attitude-loop values are the nominal ones.
    """

    delta_max: float = 0.12
    k_max: float = 0.1
    j_max: float = 0.3
    delta_weight: str = "rational"
    wj_form: str = "pd"
    i_gain: float = 0.0
    J_bar: float = 0.82
    P: float = 3.0
    D: float = 1.0

    def __post_init__(self):
        if min(self.delta_max, self.k_max, self.j_max) < 0:
            raise ValueError("uncertainty bounds must be nonnegative")
        if self.j_max >= 1:
            raise ValueError("inertia error bound must be below 1")
        if self.delta_weight not in ("rational", "exact"):
            raise ValueError(f"delta_weight must be rational or exact, got {self.delta_weight!r}")
        if self.delta_weight == "rational" and not np.isclose(self.delta_max, RATIONAL_DELTA_MAX):
            raise ValueError(f"the rational delay weight is fitted for delta_max = {RATIONAL_DELTA_MAX}; "
                             "use delta_weight='exact'")
        if self.wj_form not in ("pd", "pid"):
            raise ValueError(f"wj_form must be pd or pid, got {self.wj_form!r}")
        if self.i_gain < 0 or min(self.J_bar, self.P, self.D) <= 0:
            raise ValueError("attitude loop values must be positive")

    def w_delta(self, omega) -> np.ndarray:
        if self.delta_weight == "exact":
            return w_delta_exact(self.delta_max, omega)
        return np.abs(freq_eval(w_delta_rational(), np.asarray(omega, dtype=float)))

    def w_k(self, omega) -> np.ndarray:
        return np.full(np.shape(omega), self.k_max, dtype=float)

    def w_j(self, omega, channel: str = "xy") -> np.ndarray:
        if channel == "z":
            return np.zeros(np.shape(omega))
        fr = w_j_envelope(self.J_bar, self.j_max, self.P, self.D, np.atleast_1d(omega),
                          self.wj_form, self.i_gain)
        return fr.magnitude().reshape(np.shape(omega))

    def envelope_shortfall(self, omega) -> float:
        """Worst ratio ``1 - |W_delta| / exact envelope`` on ``omega`` (<= 0 means sound)."""
        exact = w_delta_exact(self.delta_max, omega)
        used = self.w_delta(omega)
        mask = exact > 0
        if not mask.any():
            return 0.0
        return float(np.max(1.0 - used[mask] / exact[mask]))
