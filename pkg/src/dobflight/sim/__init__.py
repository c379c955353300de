from .scenario import (ConfigError, Disturbance, ScenarioConfig, accel_profile,
                       circle_reference, disturbance_signal)
from .runner import RunLog, run
from .metrics import metrics, moi_comparison

__all__ = [
    "ConfigError", "Disturbance", "ScenarioConfig", "accel_profile", "circle_reference",
    "disturbance_signal", "RunLog", "run", "metrics", "moi_comparison",
]
