"""Command-line entry point: simulate, filter, smooth, calibrate, bench.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime or
numerical error, 64 usage error (unknown subcommand or bad flags).
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .bench import Scenario, export_report, run_study
from .calibration import calibrate_efficiency, calibrate_radius
from .config import (contamination_from_config, load_config,
                     model_from_config, scenario_from_config,
                     variant_from_name)
from .contamination import simulate_contaminated
from .errors import ConfigError
from .filters import run_filter
from .presets import PRESET_NAMES
from .smoothers import smooth

USAGE_ERROR = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _fmt(x):
    return repr(float(x))


def _build_parser():
    parser = _Parser(prog="robustkalman",
                     description="Robust Kalman filtering, smoothing, "
                                 "calibration and Monte-Carlo benchmarks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p, out_required=True):
        p.add_argument("--config", "-c", help="JSON config file")
        p.add_argument("--preset", choices=PRESET_NAMES,
                       help="built-in model preset")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", "-o", required=out_required, help="output file")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("simulate", help="simulate a (contaminated) trajectory")
    common(p)
    p.add_argument("--T", type=int, help="horizon")
    p.add_argument("--regime", choices=("ideal", "ao", "io", "block"),
                   default="ideal")

    p = sub.add_parser("filter", help="run a filter over observations from CSV")
    common(p)
    p.add_argument("--variant", default="classical",
                   help="classical | rls-ao | rls-io")
    p.add_argument("--b", type=float, help="fixed clipping height")
    p.add_argument("--r", type=float, help="calibrate by contamination radius")
    p.add_argument("--delta", type=float, help="calibrate by efficiency premium")
    p.add_argument("--in", dest="infile", required=True,
                   help="observations CSV (t, y_1..y_q; blank cells = missing)")

    p = sub.add_parser("smooth", help="filter then fixed-interval smooth")
    common(p)
    p.add_argument("--variant", default="classical")
    p.add_argument("--b", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--in", dest="infile", required=True)

    p = sub.add_parser("calibrate", help="solve per-step clipping heights")
    common(p, out_required=False)
    p.add_argument("--variant", default="rls-ao", help="rls-ao | rls-io")
    p.add_argument("--criterion", choices=("radius", "efficiency"),
                   default="radius")
    p.add_argument("--r", type=float, help="radius value")
    p.add_argument("--delta", type=float, help="efficiency premium")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--mc-size", type=int, default=200_000)

    p = sub.add_parser("bench", help="run a Monte-Carlo study")
    common(p)
    p.add_argument("--runs", type=int, help="number of replications")
    p.add_argument("--T", type=int, help="horizon")
    p.add_argument("--score-time", type=int, help="step at which errors are scored")
    p.add_argument("--regimes", help="comma list, e.g. ideal,ao,io")
    p.add_argument("--r", type=float, help="radius for calibration")
    p.add_argument("--threads", type=int, help="worker cap for replications")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _load(args, need_model=True):
    cfg = load_config(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    T = getattr(args, "T", None) or int(cfg.get("horizon", 50))
    model = None
    if args.preset:
        model = model_from_config({"preset": args.preset}, T=T, seed=seed)
    elif "model" in cfg:
        model = model_from_config(cfg["model"], T=T, seed=seed)
    if need_model and model is None:
        raise ConfigError("no model given: use --preset or a config 'model' section")
    return cfg, model, seed, T


def _cmd_simulate(args):
    cfg, model, seed, T = _load(args)
    spec = contamination_from_config(cfg.get("contamination"))
    if args.regime != "ideal":
        from .bench import _restrict, default_contamination
        if spec is None:
            spec = default_contamination(args.preset or
                                         cfg.get("model", {}).get("preset"))
        if spec is None:
            raise ConfigError(f"regime {args.regime!r} needs a contamination "
                              "section (or a preset with a built-in default)")
        spec = _restrict(spec, args.regime)
    else:
        spec = None
    traj = simulate_contaminated(model, T, spec, seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"]
                   + [f"y_{j+1}" for j in range(model.q)]
                   + [f"x_{j+1}" for j in range(model.p)]
                   + [f"x_ideal_{j+1}" for j in range(model.p)]
                   + ["io_hit", "ao_hit"])
        for i in range(T):
            w.writerow([i + 1]
                       + [_fmt(v) for v in traj.y_real[i]]
                       + [_fmt(v) for v in traj.x_real[i]]
                       + [_fmt(v) for v in traj.x_ideal[i]]
                       + [int(traj.io_hits[i]), int(traj.ao_hits[i])])
    if args.verbose:
        print(f"wrote {T} steps to {args.out}")
    return 0


def _read_observations(path, q):
    """(T, q) observations from CSV columns y_1..y_q; blanks become NaN."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = [f"y_{j+1}" for j in range(q)]
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in cols):
            raise ConfigError(f"observations file must have columns {cols}")
        rows = []
        for rec in reader:
            rows.append([float(rec[c]) if rec[c] not in ("", None) else np.nan
                         for c in cols])
    if not rows:
        raise ConfigError("observations file has no data rows")
    return np.asarray(rows, dtype=float)


def _make_variant(args, model, seed, T):
    variant = variant_from_name(args.variant, b=args.b)
    table = None
    if variant.robust and args.b is None:
        kind = "ao" if variant.kind == "rls-ao" else "io"
        if args.r is not None:
            table = calibrate_radius(model, kind, args.r, seed=seed, horizon=T)
        elif args.delta is not None:
            table = calibrate_efficiency(model, kind, args.delta, seed=seed,
                                         horizon=T)
        else:
            raise ConfigError("robust variants need --b, --r or --delta")
    return variant, table


def _cmd_filter(args, do_smooth=False):
    cfg, model, seed, T = _load(args)
    ys = _read_observations(args.infile, model.q)
    variant, table = _make_variant(args, model, seed, len(ys))
    result = run_filter(model, ys, variant, table)
    if do_smooth:
        smooth(result).to_csv(args.out)
    else:
        result.to_csv(args.out)
    if args.verbose:
        print(f"{variant.label}: {len(ys)} steps -> {args.out}")
    return 0


def _cmd_calibrate(args):
    cfg, model, seed, T = _load(args)
    variant = args.variant.replace("rls-", "").replace("rls_", "")
    if variant not in ("ao", "io"):
        raise ConfigError(f"--variant must be rls-ao or rls-io, got {args.variant!r}")
    if args.criterion == "radius":
        if args.r is None:
            raise ConfigError("--criterion radius needs --r")
        table = calibrate_radius(model, variant, args.r, mc_size=args.mc_size,
                                 seed=seed, horizon=args.horizon)
    else:
        if args.delta is None:
            raise ConfigError("--criterion efficiency needs --delta")
        table = calibrate_efficiency(model, variant, args.delta,
                                     mc_size=args.mc_size, seed=seed,
                                     horizon=args.horizon)
    payload = json.dumps(table.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


def _cmd_bench(args):
    cfg, model, seed, T = _load(args)
    overrides = {"model": model, "seed": seed, "T": T}
    if args.runs is not None:
        overrides["n_runs"] = args.runs
    if args.score_time is not None:
        overrides["t_star"] = args.score_time
    if args.regimes:
        overrides["regimes"] = tuple(args.regimes.split(","))
    if args.r is not None:
        overrides["calibration_value"] = args.r
    if args.threads is not None:
        overrides["threads"] = args.threads
    scenario = scenario_from_config(cfg, **overrides)
    report = run_study(scenario)
    export_report(report, args.format, args.out)
    if args.verbose:
        print(f"{scenario.model_name}: {scenario.n_runs} runs, "
              f"t*={scenario.t_star}")
        for regime in report.regimes:
            cells = "  ".join(
                f"{v}={report.mse(regime, v):.3f}" for v in report.variant_labels)
            print(f"  {regime:>5} filter   {cells}")
            cells = "  ".join(
                f"{v}={report.mse(regime, v, 'smoother'):.3f}"
                for v in report.variant_labels)
            print(f"  {regime:>5} smoother {cells}")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    handlers = {
        "simulate": _cmd_simulate,
        "filter": lambda a: _cmd_filter(a, do_smooth=False),
        "smooth": lambda a: _cmd_filter(a, do_smooth=True),
        "calibrate": _cmd_calibrate,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numerical/runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
