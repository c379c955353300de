"""Workbench configuration: an INI file with fixed sections and keys.

Lookup order for the file: explicit path, then ``$DOBFLIGHT_CONFIG``, then
the packaged ``default.cfg``.  A file may set any subset of keys; the rest
come from the packaged defaults.  Unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .conversion import PositionGains
from .dob import QFilterConfig
from .robust.weights import UncertaintyModel
from .sim.scenario import Disturbance, ScenarioConfig
from .vehicle import VehicleParams

ENV_VAR = "DOBFLIGHT_CONFIG"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# section -> key -> parser
SCHEMA = {
    "vehicle": {"mass": float, "inertia": _floats, "gravity": float},
    "attitude": {"p_gain": _floats, "d_gain": _floats},
    "outer": {"kp": float, "kd": float, "accel_limit": float},
    "qfilter": {"tau1": float, "tau2": float, "zeta": float, "form": str},
    "uncertainty": {"delta_max": float, "k_max": float, "j_max": float, "delta_weight": str,
                    "wj_form": str, "i_gain": float},
    "scenario": {"duration": float, "seed": int, "circle_radius": float, "circle_period": float,
                 "dob_warmup": float, "sinusoid_amplitude": float, "sinusoid_frequency": float,
                 "step_force": _floats, "step_start": float, "pull_force": float,
                 "pull_period": float, "pull_axis": int, "pull_start": float, "pull_lag": float},
    "output": {"directory": str},
}


@dataclass(frozen=True)
class ScenarioDefaults:
    duration: float = 30.0
    seed: int = 0
    circle_radius: float = 3.0
    circle_period: float = 12.0
    dob_warmup: float = 0.5
    sinusoid_amplitude: float = 5.5
    sinusoid_frequency: float = 0.2
    step_force: tuple[float, float, float] = (6.0, 0.0, 0.0)
    step_start: float = 5.0
    pull_force: float = 6.0
    pull_period: float = 4.0
    pull_axis: int = 0
    pull_start: float = 2.0
    pull_lag: float = 0.2

    def disturbance(self, kind: str) -> Disturbance:
        if kind == "sinusoid":
            return Disturbance("sinusoid", amplitude=self.sinusoid_amplitude,
                               frequency=self.sinusoid_frequency)
        if kind == "step":
            return Disturbance("step", force=self.step_force, start=self.step_start)
        if kind == "pull_release":
            f = [0.0, 0.0, 0.0]
            f[self.pull_axis] = self.pull_force
            return Disturbance("pull_release", force=tuple(f), period=self.pull_period,
                               axis=self.pull_axis, start=self.pull_start, lag=self.pull_lag)
        return Disturbance(kind)


@dataclass(frozen=True)
class WorkbenchConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    gains: PositionGains = field(default_factory=PositionGains)
    qfilter: QFilterConfig = field(default_factory=QFilterConfig)
    uncertainty: UncertaintyModel = field(default_factory=UncertaintyModel)
    scenario: ScenarioDefaults = field(default_factory=ScenarioDefaults)
    output_dir: str = "out"

    def scenario_config(self, **overrides) -> ScenarioConfig:
        s = self.scenario
        base = dict(vehicle=self.vehicle, gains=self.gains, q_filter=self.qfilter,
                    duration=s.duration, seed=s.seed, circle_radius=s.circle_radius,
                    circle_period=s.circle_period, dob_warmup=s.dob_warmup)
        base.update(overrides)
        return ScenarioConfig(**base)


def default_config_path() -> Path:
    return Path(str(resources.files("dobflight") / "data" / "default.cfg"))


def _read(parser: configparser.ConfigParser, text: str, source: str):
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _check_keys(parser, source):
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")


def _build(values: dict) -> WorkbenchConfig:
    v, a, o, q, u, s = (values[k] for k in ("vehicle", "attitude", "outer", "qfilter", "uncertainty", "scenario"))
    vehicle = VehicleParams(m=v["mass"], J=v["inertia"], P_gain=a["p_gain"], D_gain=a["d_gain"],
                            g=v["gravity"])
    # the horizontal analysis uses the pitch axis of the nominal loop
    unc = UncertaintyModel(delta_max=u["delta_max"], k_max=u["k_max"], j_max=u["j_max"],
                           delta_weight=u["delta_weight"], wj_form=u["wj_form"], i_gain=u["i_gain"],
                           J_bar=vehicle.J[1], P=vehicle.P_gain[1], D=vehicle.D_gain[1])
    scen = ScenarioDefaults(**s)
    if len(scen.step_force) != 3:
        raise ValueError("step_force needs three components")
    for kind in ("sinusoid", "step", "pull_release"):
        scen.disturbance(kind)
    cfg = WorkbenchConfig(vehicle=vehicle,
                          gains=PositionGains(o["kp"], o["kd"], o["accel_limit"]),
                          qfilter=QFilterConfig(q["tau1"], q["tau2"], q["zeta"], q["form"]),
                          uncertainty=unc, scenario=scen, output_dir=values["output"]["directory"])
    cfg.scenario_config()  # revalidate the assembled scenario
    return cfg


def loads(text: str, source: str = "<string>") -> WorkbenchConfig:
    """Parse config text layered over the packaged defaults."""
    parser = configparser.ConfigParser(interpolation=None)
    _read(parser, default_config_path().read_text(), "default.cfg")
    user = configparser.ConfigParser(interpolation=None)
    _read(user, text, source)
    _check_keys(user, source)
    parser.read_dict(user)
    values = {}
    try:
        for section, keys in SCHEMA.items():
            values[section] = {k: conv(parser[section][k].strip()) for k, conv in keys.items()}
        return _build(values)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path=None) -> WorkbenchConfig:
    if path is None:
        path = os.environ.get(ENV_VAR) or default_config_path()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text, str(path))


def dumps(cfg: WorkbenchConfig) -> str:
    """Serialize to the INI layout accepted by :func:`loads`."""
    v, u, s = cfg.vehicle, cfg.uncertainty, cfg.scenario
    data = {
        "vehicle": {"mass": v.m, "inertia": v.J, "gravity": v.g},
        "attitude": {"p_gain": v.P_gain, "d_gain": v.D_gain},
        "outer": {"kp": cfg.gains.kp, "kd": cfg.gains.kd, "accel_limit": cfg.gains.limit},
        "qfilter": {"tau1": cfg.qfilter.tau1, "tau2": cfg.qfilter.tau2, "zeta": cfg.qfilter.zeta,
                    "form": cfg.qfilter.form},
        "uncertainty": {"delta_max": u.delta_max, "k_max": u.k_max, "j_max": u.j_max,
                        "delta_weight": u.delta_weight, "wj_form": u.wj_form, "i_gain": u.i_gain},
        "scenario": {k: getattr(s, k) for k in SCHEMA["scenario"]},
        "output": {"directory": cfg.output_dir},
    }
    parser = configparser.ConfigParser(interpolation=None)
    for section, items in data.items():
        parser[section] = {k: _fmt(val) for k, val in items.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
