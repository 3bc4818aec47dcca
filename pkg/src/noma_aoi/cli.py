"""Command-line front end: scenario files, analysis, simulation, comparison
reports, transmission-probability optimization, parameter sweeps, and the
canned reference grids."""

import argparse
import csv
import sys
from dataclasses import replace

from . import experiments
from .config import (ConfigError, DegenerateConfigError, SystemConfig,
                     config_from_mapping, configure_snr_ladder, db_to_linear,
                     linear_to_db, read_config_file, uniform_q, validate_config)
from .nrt import BracketError, average_aoi_nrt, optimal_ptx_nrt_k2, ptx_grid_argmin
from .rt import absorbing_moments, average_aoi_rt, success_prob_rt
from .simulator import (ZeroDeliveryError, export_deliveries_csv,
                        run_replications, run_simulation)

CONFIG_DEFAULTS = {"m": 8, "k": 4, "lambda": 0.5, "p_tx": 0.5,
                   "power_db": 20.0, "rate": 0.2, "q": "uniform",
                   "slot_duration": 1.0}

# CLI attribute -> flat-file schema key
_FLAG_TO_KEY = {"m": "m", "k": "k", "lam": "lambda", "ptx": "p_tx",
                "power_db": "power_db", "rate": "rate", "q": "q",
                "slot": "slot_duration"}


def _add_config_flags(parser):
    grp = parser.add_argument_group("scenario")
    grp.add_argument("--config", metavar="FILE", help="flat key=value scenario file")
    grp.add_argument("--m", type=int, help="number of sources")
    grp.add_argument("--k", type=int, help="number of SNR levels")
    grp.add_argument("--lambda", dest="lam", type=float, help="arrival probability")
    grp.add_argument("--ptx", type=float, help="attempted transmission probability")
    grp.add_argument("--power-db", type=float, help="power budget in dB")
    grp.add_argument("--rate", type=float, help="target rate (bits/s/Hz)")
    grp.add_argument("--q", help="'uniform' or comma list, e.g. 0.6,0.4")
    grp.add_argument("--slot", type=float, help="slot duration (time units)")


def _explicit_values(args) -> dict:
    return {key: getattr(args, attr) for attr, key in _FLAG_TO_KEY.items()
            if getattr(args, attr, None) is not None}


def build_config(args, parser) -> SystemConfig:
    """Defaults <- config file <- explicit CLI flags."""
    values = dict(CONFIG_DEFAULTS)
    try:
        if args.config:
            values.update(read_config_file(args.config))
        values.update(_explicit_values(args))
        cfg = config_from_mapping(values)
    except (ConfigError, ValueError) as exc:
        parser.error(str(exc))
    problems = validate_config(cfg)
    if problems:
        parser.error("; ".join(problems))
    return cfg


def _write_rows(header, rows, path):
    def fmt(v):
        return f"{v:.10g}" if isinstance(v, float) else str(v)

    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    finally:
        if path:
            fh.close()


def cmd_levels(args, parser):
    cfg = build_config(args, parser)
    ladder = configure_snr_ladder(cfg)
    for idx, level in enumerate(ladder.levels, start=1):
        print(f"P_{idx} = {level:.10g} ({linear_to_db(level):.4f} dB)")
    print(f"bar_p_tx = {ladder.bar_p_tx:.10g}")
    print("bar_q = " + ", ".join(f"{v:.10g}" for v in ladder.bar_q))
    return 0


def _analysis_numbers(cfg: SystemConfig, scheme: str) -> dict:
    if scheme == "nrt":
        res = average_aoi_nrt(cfg)
        return dict(success_prob=res.success_prob, mean_interval=res.mean_interval,
                    second_moment_interval=res.second_moment_interval,
                    mean_system_time=cfg.slot_duration, avg_aoi=res.avg_aoi)
    ladder = configure_snr_ladder(cfg)
    p_tilde = success_prob_rt(ladder, cfg)
    if p_tilde <= 0.0:
        raise DegenerateConfigError("conditional success probability is zero")
    mom = absorbing_moments(cfg.lam, p_tilde, cfg.slot_duration)
    return dict(success_prob=p_tilde, mean_interval=mom.mean_interval,
                second_moment_interval=mom.second_moment_interval,
                mean_system_time=mom.mean_system_time,
                avg_aoi=average_aoi_rt(cfg, p_tilde=p_tilde))


def cmd_analyze(args, parser):
    cfg = build_config(args, parser)
    try:
        nums = _analysis_numbers(cfg, args.scheme)
    except DegenerateConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"scheme          {args.scheme}")
    print(f"success prob    {nums['success_prob']:.10g}")
    print(f"E[D]            {nums['mean_interval']:.10g}")
    print(f"E[D^2]          {nums['second_moment_interval']:.10g}")
    print(f"E[S]            {nums['mean_system_time']:.10g}")
    print(f"average AoI     {nums['avg_aoi']:.10g}")
    if args.csv:
        header = ["scheme", "m", "k", "lambda", "ptx", "power_db", "rate", "slot",
                  "success_prob", "mean_interval", "second_moment_interval",
                  "mean_system_time", "avg_aoi"]
        row = [args.scheme, cfg.m, cfg.k, cfg.lam, cfg.p_tx,
               linear_to_db(cfg.power), cfg.rate, cfg.slot_duration,
               *[nums[h] for h in header[8:]]]
        _write_rows(header, [row], args.csv)
    return 0


def cmd_simulate(args, parser):
    cfg = build_config(args, parser)
    try:
        result = run_simulation(cfg, args.scheme, args.slots, args.seed,
                                warmup=args.warmup)
    except ZeroDeliveryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"scheme          {args.scheme}")
    print(f"slots           {result.slots}")
    print(f"seed            {result.seed}")
    print(f"deliveries      {result.success_count}")
    print(f"buffered slots  {result.buffered_slot_count}")
    print(f"average AoI     {result.avg_aoi:.10g}")
    if args.csv:
        export_deliveries_csv(result, args.csv)
    return 0


def cmd_compare(args, parser):
    cfg = build_config(args, parser)
    try:
        analytical = _analysis_numbers(cfg, args.scheme)["avg_aoi"]
        summary = run_replications(cfg, args.scheme, args.slots, args.seed,
                                   args.reps, warmup=args.warmup)
    except (DegenerateConfigError, ZeroDeliveryError) as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    rel_err = abs(summary.mean - analytical) / analytical
    ok = rel_err <= args.tolerance
    print(f"scheme          {args.scheme}")
    print(f"analysis AoI    {analytical:.10g}")
    print(f"simulated AoI   {summary.mean:.10g} (stderr {summary.stderr:.3g}, "
          f"{args.reps} x {args.slots} slots)")
    print(f"relative error  {rel_err:.4%} (tolerance {args.tolerance:.4%})")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_optimize(args, parser):
    cfg = build_config(args, parser)
    if args.method == "corollary1":
        if args.scheme != "nrt":
            print("error: unsupported method: 'corollary1' applies to the nrt "
                  "scheme only", file=sys.stderr)
            return 2
        if cfg.k != 2:
            print("error: unsupported method: 'corollary1' requires k=2",
                  file=sys.stderr)
            return 2
        try:
            ptx = optimal_ptx_nrt_k2(cfg)
        except BracketError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        ptx = ptx_grid_argmin(cfg, args.scheme, grid_step=args.grid_step)
    achieved = _analysis_numbers(replace(cfg, p_tx=ptx), args.scheme)["avg_aoi"]
    print(f"scheme          {args.scheme}")
    print(f"method          {args.method}")
    print(f"optimal ptx     {ptx:.10g}")
    print(f"achieved AoI    {achieved:.10g}")
    return 0


SWEEP_PARAMS = ("m", "k", "lambda", "ptx", "power_db", "q1")


def _sweep_values(args, parser):
    if args.values:
        return [float(v) for v in args.values.split(",")]
    if args.start is None or args.stop is None or args.step is None:
        parser.error("sweep needs either --values or --from/--to/--step")
    if args.step <= 0:
        parser.error("--step must be positive")
    vals, v = [], args.start
    while v <= args.stop + 1e-12:
        vals.append(round(v, 12))
        v += args.step
    return vals


def _apply_sweep_value(cfg: SystemConfig, param: str, value: float) -> SystemConfig:
    if param == "m":
        return replace(cfg, m=int(value))
    if param == "k":
        k = int(value)
        return replace(cfg, k=k, q=uniform_q(k))
    if param == "lambda":
        return replace(cfg, lam=value)
    if param == "ptx":
        return replace(cfg, p_tx=value)
    if param == "power_db":
        return replace(cfg, power=db_to_linear(value))
    if param == "q1":
        if cfg.k != 2:
            raise ConfigError("q1 sweep requires k=2")
        return replace(cfg, q=(value, 1.0 - value))
    raise ConfigError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args, parser):
    cfg = build_config(args, parser)
    values = _sweep_values(args, parser)
    schemes = ("nrt", "rt") if args.scheme == "both" else (args.scheme,)
    header = [args.param]
    for scheme in schemes:
        if args.mode in ("analysis", "both"):
            header.append(f"{scheme}_analysis")
        if args.mode in ("simulation", "both"):
            header.extend([f"{scheme}_sim_mean", f"{scheme}_sim_stderr"])
    rows = []
    try:
        for value in sorted(values):
            swept = _apply_sweep_value(cfg, args.param, value)
            problems = validate_config(swept)
            if problems:
                parser.error(f"{args.param}={value}: " + "; ".join(problems))
            row = [value]
            for scheme in schemes:
                if args.mode in ("analysis", "both"):
                    row.append(_analysis_numbers(swept, scheme)["avg_aoi"])
                if args.mode in ("simulation", "both"):
                    summary = run_replications(swept, scheme, args.slots,
                                               args.seed, args.reps,
                                               warmup=args.warmup)
                    row.extend([summary.mean, summary.stderr])
            rows.append(row)
    except (ConfigError, DegenerateConfigError, ZeroDeliveryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_rows(header, rows, args.csv)
    return 0


def _reproduce_overrides(args) -> dict:
    """Collect scenario overrides for a canned target from the config file
    and the explicit flags (the file first, the flags on top)."""
    raw = {}
    if args.config:
        raw.update(read_config_file(args.config))
    raw.update(_explicit_values(args))
    overrides = {}
    for key, val in raw.items():
        if key == "lambda":
            overrides["lam"] = float(val)
        elif key == "q":
            if isinstance(val, str):
                if val.strip().lower() != "uniform":
                    overrides["q"] = tuple(float(p) for p in val.split(","))
            else:
                overrides["q"] = tuple(float(p) for p in val)
        elif key in ("m", "k"):
            overrides[key] = int(val)
        elif key in ("p_tx", "power_db", "rate", "slot_duration"):
            overrides[key] = float(val)
    return overrides


def cmd_reproduce(args, parser):
    try:
        overrides = _reproduce_overrides(args)
    except (ConfigError, ValueError) as exc:
        parser.error(str(exc))
    if overrides:
        print("note: non-reference parameterization "
              f"({', '.join(sorted(overrides))} overridden); values will not "
              "match the bundled reference grids", file=sys.stderr)
    try:
        header, rows = experiments.reproduce(args.target, **overrides)
    except (ValueError, DegenerateConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_rows(header, rows, args.csv)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-aoi",
        description="Average AoI analysis and slot-level simulation of "
                    "NOMA-assisted grant-free uplink transmission.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, scheme_choices=("nrt", "rt"), sim=False,
            csv_flag=False):
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        if scheme_choices:
            p.add_argument("--scheme", choices=scheme_choices, default="nrt")
        if sim:
            p.add_argument("--slots", type=int, default=300_000)
            p.add_argument("--seed", type=int, default=1)
            p.add_argument("--reps", type=int, default=1)
            p.add_argument("--warmup", type=int, default=0)
        if csv_flag:
            p.add_argument("--csv", metavar="PATH", help="write CSV here")
        p.set_defaults(func=func)
        return p

    add("levels", cmd_levels, "print the SNR ladder and effective access "
        "probabilities", scheme_choices=None)
    add("analyze", cmd_analyze, "closed-form AoI report", csv_flag=True)
    add("simulate", cmd_simulate, "slot-level Monte Carlo AoI estimate",
        sim=True, csv_flag=True)
    p_cmp = add("compare", cmd_compare, "analysis vs simulation report", sim=True)
    p_cmp.add_argument("--tolerance", type=float, default=0.02,
                       help="relative error to pass (default 0.02)")
    p_opt = add("optimize", cmd_optimize, "recommend the transmission probability")
    p_opt.add_argument("--method", choices=("corollary1", "grid"), default="grid")
    p_opt.add_argument("--grid-step", type=float, default=0.01)
    p_sw = add("sweep", cmd_sweep, "sweep one parameter, emit CSV",
               scheme_choices=("nrt", "rt", "both"), sim=True, csv_flag=True)
    p_sw.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p_sw.add_argument("--values", help="explicit comma list of swept values")
    p_sw.add_argument("--from", dest="start", type=float)
    p_sw.add_argument("--to", dest="stop", type=float)
    p_sw.add_argument("--step", type=float)
    p_sw.add_argument("--mode", choices=("analysis", "simulation", "both"),
                      default="analysis")
    p_rep = add("reproduce", cmd_reproduce, "emit a canned reference grid as CSV",
                scheme_choices=None, csv_flag=True)
    p_rep.add_argument("--target", choices=experiments.REPRODUCE_TARGETS,
                       required=True)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
