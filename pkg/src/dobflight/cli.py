"""Command-line front end.

Subcommands: ``sim``, ``analyze``, ``sweep`` and ``compare-moi``.  Exit codes:
0 success, 1 usage or configuration error, 2 runtime abort.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, WorkbenchConfig, load_config
from .robust import BoundaryNotBracketed, check_stability, sgt_check, tau_sweep
from .robust.analysis import write_curves_csv, write_sweep_csv
from .sim.metrics import MetricsError, metrics, moi_comparison
from .sim.runner import run, write_log_csv
from .sim.scenario import Disturbance

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

SCENARIOS = {"hover": "hover", "circle": "circle", "accel-profile": "accel_profile"}
DIST_KINDS = ("none", "sinusoid", "step", "pull_release")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _j_list(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text}")
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("J values must be positive")
    return vals


def _floats(text):
    return tuple(float(v) for v in text.split(","))


_DIST_KEYS = {"amplitude": float, "frequency": float, "axes": lambda t: tuple(int(v) for v in t.split(",")),
              "force": _floats, "start": float, "period": float, "axis": int, "lag": float}


def parse_disturbance(spec: str, cfg: WorkbenchConfig) -> Disturbance:
    """``kind[:key=value[:key=value...]]``, e.g. ``step:force=6,0,0:start=5``.

    Unset fields come from the scenario defaults of the configuration.
    """
    kind, *items = spec.split(":")
    kind = kind.replace("-", "_")
    if kind not in DIST_KINDS:
        raise UsageError(f"unknown disturbance kind {kind!r} (choose from {', '.join(DIST_KINDS)})")
    base = cfg.scenario.disturbance(kind)
    changes = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in _DIST_KEYS:
            raise UsageError(f"bad disturbance field {item!r}; known fields: {', '.join(_DIST_KEYS)}")
        try:
            changes[key] = _DIST_KEYS[key](value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}")
    if kind == "pull_release" and "axis" in changes and "force" not in changes:
        f = [0.0, 0.0, 0.0]
        f[changes["axis"]] = cfg.scenario.pull_force
        changes["force"] = tuple(f)
    try:
        return replace(base, **changes)
    except ValueError as exc:
        raise UsageError(str(exc))


def _write_metrics(m: dict, out: Path, extra: dict | None = None):
    items = dict(extra or {})
    items.update(m)
    with (out / "metrics.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(items))
        w.writerow([repr(v) if isinstance(v, float) else v for v in items.values()])
    text = "".join(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n" for k, v in items.items())
    (out / "metrics.txt").write_text(text)
    return text


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _qcfg(args, cfg):
    q = cfg.qfilter
    changes = {}
    if getattr(args, "tau1", None) is not None:
        changes["tau1"] = args.tau1
    if getattr(args, "tau2", None) is not None:
        changes["tau2"] = args.tau2
    if getattr(args, "q_form", None):
        changes["form"] = args.q_form
    return replace(q, **changes) if changes else q


def cmd_sim(args, cfg: WorkbenchConfig) -> int:
    dist = parse_disturbance(args.disturbance, cfg)
    overrides = dict(converter=args.converter, dob=args.dob, trajectory=SCENARIOS[args.scenario],
                     disturbance=dist, q_filter=_qcfg(args, cfg))
    if args.duration is not None:
        overrides["duration"] = args.duration
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.j is not None:
        overrides["J"] = args.j
    try:
        scen = cfg.scenario_config(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = _out_dir(args, cfg)
    log = run(scen)
    name = f"{args.scenario.replace('-', '_')}_dob_{args.dob}.csv"
    write_log_csv(log, out / name)
    extra = {"scenario": args.scenario, "converter": args.converter, "dob": args.dob,
             "disturbance": dist.kind, "aborted": int(log.aborted)}
    try:
        text = _write_metrics(metrics(log, args.window), out, extra)
    except MetricsError as exc:
        text = _write_metrics({}, out, extra)
        print(f"metrics unavailable: {exc}", file=sys.stderr)
    print(f"log: {out / name}")
    print(text, end="")
    if log.aborted:
        print(f"run aborted: {log.abort_reason}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _uncertainty(args, cfg):
    u = cfg.uncertainty
    if getattr(args, "wj_form", None):
        u = replace(u, wj_form=args.wj_form)
    if getattr(args, "delta_weight", None):
        u = replace(u, delta_weight=args.delta_weight)
    return u


def cmd_analyze(args, cfg: WorkbenchConfig) -> int:
    u = _uncertainty(args, cfg)
    q = _qcfg(args, cfg)
    mu = check_stability(args.channel, args.tau, u, qcfg=q)
    sg = sgt_check(args.channel, args.tau, u, qcfg=q)
    out = _out_dir(args, cfg)
    path = write_curves_csv(mu, sg, out / f"analyze_{args.channel}_tau{args.tau:g}.csv")
    print(f"channel={args.channel}")
    print(f"tau={args.tau!r}")
    print(f"wj_form={u.wj_form}")
    print(f"q_form={q.form}")
    print(f"stable={str(mu.stable).lower()}")
    print(f"peak_mu={mu.peak!r}")
    print(f"peak_mu_omega={mu.peak_omega!r}")
    print(f"peak_sgt={sg.peak!r}")
    print(f"stable_sgt={str(sg.stable).lower()}")
    print(f"converged={str(mu.converged).lower()}")
    if not mu.converged:
        print("warning: D-scaling did not converge at every frequency; the bound is still valid",
              file=sys.stderr)
    print(f"curves: {path}")
    return EXIT_OK


def cmd_sweep(args, cfg: WorkbenchConfig) -> int:
    if args.tau_min >= args.tau_max:
        raise UsageError("--tau-min must be below --tau-max")
    u = _uncertainty(args, cfg)
    q = _qcfg(args, cfg)
    res = tau_sweep(args.channel, (args.tau_min, args.tau_max), args.steps, u, qcfg=q)
    out = _out_dir(args, cfg)
    path = write_sweep_csv(res, out / f"sweep_{args.channel}.csv")
    print(f"channel={args.channel}")
    print(f"wj_form={u.wj_form}")
    print(f"q_form={q.form}")
    for crit in ("mu", "sgt"):
        tau = getattr(res, f"tau_{crit}")
        print(f"tau_{crit}={tau!r}" if tau is not None else f"tau_{crit}=none")
    print(f"converged={str(all(r.converged for r in res.rows)).lower()}")
    print(f"curve: {path}")
    if res.errors:
        for crit, msg in res.errors.items():
            print(f"error: boundary not bracketed ({msg})", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_compare_moi(args, cfg: WorkbenchConfig) -> int:
    scenarios = ("accel_profile", "circle") if args.scenario == "both" else (SCENARIOS[args.scenario],)
    template = cfg.scenario_config(duration=args.duration or cfg.scenario.duration)
    results = moi_comparison(args.j, template, scenarios, args.window, workers=args.workers,
                             keep_logs=True)
    out = _out_dir(args, cfg)
    with (out / "moi_table.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "converter", "J", "rms_acc_x", "rms_acc_y", "rms_acc_z", "acc_cmd_rms",
                    "z_rel", "rms_pos_x", "rms_pos_y", "rms_pos_z"])
        for row, log in results:
            w.writerow([row.scenario, row.converter, repr(row.J), *map(repr, row.rms_acc),
                        repr(row.acc_cmd_rms), repr(row.z_rel), *map(repr, row.rms_pos)])
            write_log_csv(log, out / f"moi_{row.scenario}_{row.converter}_J{row.J:g}.csv")
    print(f"{'scenario':<14}{'converter':<10}{'J':>6}{'rms_acc_z':>12}{'z_rel':>10}")
    for row, _ in results:
        print(f"{row.scenario:<14}{row.converter:<10}{row.J:>6g}{row.rms_acc[2]:>12.5f}{row.z_rel:>10.5f}")
    print(f"table: {out / 'moi_table.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dobflight", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="config file (default: $DOBFLIGHT_CONFIG or the packaged default)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sim", help="run one closed-loop scenario")
    s.add_argument("--scenario", choices=tuple(SCENARIOS), default="hover")
    s.add_argument("--converter", choices=("case1", "case2"), default="case2")
    s.add_argument("--dob", choices=("on", "off", "absent"), default="on")
    s.add_argument("--disturbance", default="sinusoid",
                   help="kind[:key=value...], kind one of none, sinusoid, step, pull_release")
    s.add_argument("--duration", type=_positive_float)
    s.add_argument("--seed", type=int)
    s.add_argument("--j", type=_positive_float, help="roll/pitch inertia of the plant")
    s.add_argument("--tau1", type=_positive_float)
    s.add_argument("--tau2", type=_positive_float)
    s.add_argument("--q-form", choices=("compact", "standard"))
    s.add_argument("--window", type=float, default=5.0, help="metrics window start, s")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sim)

    for name, func, helptext in (("analyze", cmd_analyze, "robust stability at one tau"),
                                 ("sweep", cmd_sweep, "stability boundary over a tau range")):
        a = sub.add_parser(name, help=helptext)
        a.add_argument("--channel", choices=("xy", "z"), required=True)
        if name == "analyze":
            a.add_argument("--tau", type=_positive_float, required=True)
        else:
            a.add_argument("--tau-min", type=_positive_float, default=0.02)
            a.add_argument("--tau-max", type=_positive_float, default=0.5)
            a.add_argument("--steps", type=_positive_int, default=25)
        a.add_argument("--wj-form", choices=("pd", "pid"))
        a.add_argument("--delta-weight", choices=("rational", "exact"))
        a.add_argument("--q-form", choices=("compact", "standard"))
        a.add_argument("--out")
        a.set_defaults(func=func)

    m = sub.add_parser("compare-moi", help="case1 vs case2 over plant inertia values")
    m.add_argument("--j", type=_j_list, default=(0.1, 0.5, 1.0))
    m.add_argument("--scenario", choices=("accel-profile", "circle", "both"), default="accel-profile")
    m.add_argument("--duration", type=_positive_float)
    m.add_argument("--window", type=float, default=5.0)
    m.add_argument("--workers", type=_positive_int)
    m.add_argument("--out")
    m.set_defaults(func=cmd_compare_moi)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"dobflight: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundaryNotBracketed as exc:
        print(f"dobflight: boundary not bracketed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RuntimeError, MetricsError, OSError) as exc:
        print(f"dobflight: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
