"""Robust stability of the DOB loop: weights, LFT assembly, mu bound, SGT, sweeps."""
from .corroboration import CornerResult, corroborate
from .analysis import (BoundaryNotBracketed, MuResult, SgtResult, SweepResult, SweepRow,
                       check_stability, lumped_weight, m11_stack, q_filter, sgt_check, tau_sweep,
                       write_curves_csv, write_sweep_csv)
from .mu import assemble_m11, mu_upper_bound, mu_upper_bound_batch, sigma_max, spectral_radius
from .sampling import find_destabilizer, min_abs_det, mu_lower_bound
from .weights import UncertaintyModel, w_delta_exact, w_delta_rational, w_j_envelope

__all__ = [
    "BoundaryNotBracketed", "CornerResult", "corroborate", "MuResult", "SgtResult", "SweepResult", "SweepRow", "UncertaintyModel",
    "assemble_m11", "check_stability", "find_destabilizer", "lumped_weight", "m11_stack",
    "min_abs_det", "mu_lower_bound", "mu_upper_bound", "mu_upper_bound_batch", "q_filter",
    "sgt_check", "sigma_max", "spectral_radius", "tau_sweep", "w_delta_exact", "w_delta_rational",
    "w_j_envelope", "write_curves_csv", "write_sweep_csv",
]
