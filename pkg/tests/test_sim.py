import math

import numpy as np
import pytest

from dobflight.dob import DobState, QFilterConfig, build_nominal, estimate_eid
from dobflight.sim import ConfigError, Disturbance, ScenarioConfig, disturbance_signal, metrics, run
from dobflight.sim import runner as runner_mod
from dobflight.sim.metrics import MetricsError, moi_comparison
from dobflight.sim.runner import COLUMNS, RunLog, column_names, write_log_csv
from dobflight.sim.scenario import accel_profile, circle_reference
from dobflight.vehicle import VehicleAbort

M = 3.24


def test_disturbance_examples():
    assert np.all(disturbance_signal(Disturbance(), 3.0) == 0)
    d = Disturbance("sinusoid", amplitude=5.5)
    t = np.linspace(0, 5, 20001)
    peaks = np.max(np.abs([disturbance_signal(d, ti, M) for ti in t]), axis=0)
    assert np.allclose(peaks, 17.82, rtol=1e-6)
    step = Disturbance("step", force=(6, 0, 0), start=5.0)
    assert np.all(disturbance_signal(step, 4.999, M) == 0)
    assert np.array_equal(disturbance_signal(step, 5.0, M), [6, 0, 0])


def test_sinusoid_phases():
    d = Disturbance("sinusoid", amplitude=1.0, frequency=0.25)
    v = disturbance_signal(d, 0.0, 1.0)
    assert np.allclose(v, [0.0, math.sin(2 * math.pi / 3), math.sin(4 * math.pi / 3)])


def test_pull_release_against_integrated_lag():
    d = Disturbance("pull_release", force=(6, 0, 0), period=4.0, start=2.0, lag=0.2)
    dt = 1e-4
    y = 0.0
    worst = 0.0
    for k in range(int(20.0 / dt)):
        t = k * dt
        if t >= d.start:
            on = ((t - d.start) % d.period) < d.period / 2
            # exact discretization of the lag for a held input
            y = (1.0 if on else 0.0) + (y - (1.0 if on else 0.0)) * math.exp(-dt / d.lag)
        worst = max(worst, abs(disturbance_signal(d, t + dt, M)[0] - 6.0 * y))
    assert worst < 1e-3


def test_disturbance_validation():
    with pytest.raises(ConfigError):
        Disturbance("gust")
    with pytest.raises(ConfigError):
        Disturbance("sinusoid", amplitude=6.0)
    with pytest.raises(ConfigError):
        Disturbance("pull_release", period=0.0)
    with pytest.raises(ValueError):
        disturbance_signal(Disturbance(), -1.0)


def test_scenario_validation():
    with pytest.raises(ConfigError):
        ScenarioConfig(converter="case3")
    with pytest.raises(ConfigError):
        ScenarioConfig(duration=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(dob="maybe")
    with pytest.raises(ConfigError):
        ScenarioConfig(J=-0.5)
    assert ScenarioConfig().control_dt == pytest.approx(0.004)


def test_references():
    X, V, A = circle_reference(0.0)
    assert np.allclose(X, [3, 0, -5]) and np.allclose(V, [0, 2 * math.pi / 12 * 3, 0])
    assert np.all(np.abs([accel_profile(t) for t in np.linspace(0, 60, 3001)]) <= 3.0)


def _log_from(err, acc=None):
    n = len(err)
    data = {name: np.zeros((n, w)) if w > 1 else np.zeros(n) for name, w in COLUMNS}
    data["t"] = np.arange(n) * 0.004
    data["X"] = np.asarray(err, dtype=float)
    return RunLog(data, 0.004)


def test_metrics_examples():
    assert all(v == 0 for v in metrics(_log_from(np.zeros((3000, 3)))).values())
    err = np.zeros((3000, 3))
    err[:, 0] = 0.3
    m = metrics(_log_from(err))
    assert m["rms_pos_x"] == pytest.approx(0.3)
    assert m["max_pos_dev"] == pytest.approx(0.3)


def test_metrics_errors():
    with pytest.raises(MetricsError):
        metrics(_log_from(np.zeros((100, 3))), window_start=5.0)
    with pytest.raises(MetricsError):
        metrics(_log_from(np.zeros((0, 3))))


def test_log_columns_and_csv(tmp_path):
    log = run(ScenarioConfig(duration=2.0))
    assert len(log) == 500
    assert np.allclose(np.diff(log["t"]), 0.004)
    assert not np.any(np.isnan(log["acc"]))
    path = write_log_csv(log, tmp_path / "log.csv")
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == column_names()
    assert len(lines) == 501
    assert log.as_matrix().shape == (500, len(column_names()))


def test_determinism():
    cfg = ScenarioConfig(trajectory="circle", disturbance=Disturbance("sinusoid"), duration=6.0,
                         accel_noise=0.05, seed=7)
    a, b = run(cfg), run(cfg)
    assert np.array_equal(a.as_matrix(), b.as_matrix())
    c = run(cfg.evolve(seed=8))
    assert not np.array_equal(a.as_matrix(), c.as_matrix())


@pytest.mark.parametrize("dist", [Disturbance(), Disturbance("step", force=(6, 0, 0), start=1.0)])
def test_dob_off_matches_absent(dist):
    cfg = ScenarioConfig(trajectory="circle", disturbance=dist, duration=8.0)
    off, absent = run(cfg.evolve(dob="off")), run(cfg.evolve(dob="absent"))
    for key in ("X", "q", "acc", "T_t"):
        assert np.array_equal(off[key], absent[key])
    # the estimate is still produced internally
    if dist.kind == "step":
        assert np.max(np.abs(off["d_hat"][:, 0])) > 1.0
    assert np.all(absent["d_hat"] == 0)


def test_dob_neutral_on_nominal_plant():
    cfg = ScenarioConfig(trajectory="circle", disturbance=Disturbance())
    on = metrics(run(cfg.evolve(dob="on")))["rms_pos"]
    off = metrics(run(cfg.evolve(dob="off")))["rms_pos"]
    assert abs(on - off) < 0.05 * off


def test_logged_estimate_matches_estimator():
    cfg = ScenarioConfig(trajectory="circle", disturbance=Disturbance("sinusoid"), duration=10.0)
    log = run(cfg)
    dob = DobState(build_nominal(cfg.vehicle), cfg.q_filter, cfg.control_dt, M)
    g = np.array([0.0, 0.0, 9.81])
    F_prev = np.array([0.0, 0.0, -M * 9.81])
    acc_prev = np.zeros(3)
    for k in range(len(log)):
        d = estimate_eid(dob, M * (acc_prev - g), F_prev, log["q"][k][2])
        assert np.array_equal(d, log["d_hat"][k])
        acc_prev = log["acc"][k]
        F_prev = log["Ft_d"][k]


def test_kappa_reconstruction_low_frequency():
    cfg = ScenarioConfig(dob="on", disturbance=Disturbance("sinusoid", amplitude=2.0, frequency=0.05),
                         duration=40.0)
    log = run(cfg)
    sel = log["t"] >= 10.0
    resid = log["Ft_d"][sel] + log["d_injected"][sel] - log["F_d"][sel]
    ratio = np.sqrt(np.mean(resid ** 2, axis=0)) / np.sqrt(np.mean(log["d_injected"][sel] ** 2, axis=0))
    assert np.all(ratio < 0.1)


@pytest.mark.parametrize("force", [(9.0, 0.0, 0.0), (-5.0, 7.0, 0.0), (3.0, -2.0, -9.0)])
def test_constant_disturbance_rejection(force):
    assert max(abs(f) for f in force) <= 0.3 * M * 9.81
    cfg = ScenarioConfig(disturbance=Disturbance("step", force=force, start=1.0), duration=40.0)
    errs = {}
    for dob in ("on", "off"):
        log = run(cfg.evolve(dob=dob))
        tail = log["t"] >= 30.0
        errs[dob] = np.linalg.norm(np.mean(log["X"][tail] - log["X_d"][tail], axis=0))
    assert errs["on"] <= 0.1 * errs["off"]


def test_moi_case2_beats_case1_at_large_inertia():
    rows = {(r.converter, r.J): r for r in moi_comparison((1.0,), scenarios=("accel_profile",), workers=1)}
    assert rows[("case2", 1.0)].rms_acc[2] <= 0.5 * rows[("case1", 1.0)].rms_acc[2]


def test_moi_rejects_bad_inertia():
    with pytest.raises(ValueError):
        moi_comparison((0.1, -1.0))


def test_vehicle_abort_truncates_log(monkeypatch):
    calls = {"n": 0}
    real = runner_mod.rk4_array

    def failing(*args):
        calls["n"] += 1
        if calls["n"] > 400:
            raise VehicleAbort("attitude out of envelope")
        return real(*args)

    monkeypatch.setattr(runner_mod, "rk4_array", failing)
    log = run(ScenarioConfig(duration=5.0))
    assert log.aborted and "envelope" in log.abort_reason
    assert len(log) == 100


def test_conversion_failure_aborts(monkeypatch):
    from dobflight.conversion import ConversionError

    def refuse(*args):
        raise ConversionError("too close to free fall")

    monkeypatch.setattr(runner_mod, "convert_case2", refuse)
    log = run(ScenarioConfig(duration=2.0))
    assert log.aborted and "conversion failed" in log.abort_reason
    assert len(log) == 0
