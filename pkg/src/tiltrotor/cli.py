"""Command-line entry point: run, hover, trim and sweep."""

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import yaml

from . import logio
from .config import SimConfig, config_from_dict, config_to_dict, load_config
from .dynamics import hover_trim
from .errors import ConfigParseError, ConfigValidationError, TiltrotorError
from .mission import MissionPlan, run_mission

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONTROL = 4
EXIT_SOLVER = 5
EXIT_IO = 6


def _common(parser):
    parser.add_argument("--config", help="YAML configuration file (defaults built in)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="noise seed")
    parser.add_argument("--dt", type=float, help="time step (s)")
    parser.add_argument("--duration", type=float, help="simulated time (s)")
    parser.add_argument("--degrees", action="store_true", help="write angles in degrees")
    parser.add_argument("--no-noise", action="store_true", help="disable measurement noise")


def build_parser():
    parser = argparse.ArgumentParser(prog="tiltrotor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="fly the full mission")
    _common(p)

    p = sub.add_parser("hover", help="take off and hold altitude")
    _common(p)
    p.add_argument("--altitude", type=float, default=50.0, help="hover altitude (m)")

    p = sub.add_parser("trim", help="print the analytic hover trim")
    p.add_argument("--config")

    p = sub.add_parser("sweep", help="vary one config key and tabulate the summaries")
    _common(p)
    p.add_argument("--key", required=True, help="dotted config key, e.g. aircraft.S_f")
    p.add_argument("--values", help="comma-separated values (YAML scalars)")
    p.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "NUM"),
                   help="NUM evenly spaced values from START to STOP")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    return parser


def _load(args):
    cfg = load_config(args.config) if args.config else SimConfig()
    return cfg.with_overrides(dt=getattr(args, "dt", None),
                              duration=getattr(args, "duration", None),
                              output_path=getattr(args, "out", None),
                              seed=getattr(args, "seed", None),
                              no_noise=getattr(args, "no_noise", False))


def simulate(cfg):
    return run_mission(cfg.mission, cfg.aircraft, cfg.gains, cfg.noise, cfg.dt, cfg.duration,
                       cfg.control, flags=cfg.flags.model)


def _finish(log, summary, cfg, degrees):
    logio.write_log(log, summary, cfg.output_path, degrees)
    sys.stdout.write(logio.format_summary(summary, degrees))
    if summary.status != "completed":
        print(f"error: {summary.failure} at step {summary.failure_step}", file=sys.stderr)
        return summary.failure_code or EXIT_CONTROL
    return EXIT_OK


def cmd_run(args):
    cfg = _load(args)
    log, summary = simulate(cfg)
    return _finish(log, summary, cfg, args.degrees)


def cmd_hover(args):
    cfg = _load(args)
    takeoff = cfg.mission.segments[0]
    plan = MissionPlan((dataclasses.replace(takeoff, name="hover", directive="hover",
                                            Z_d=args.altitude, X_dot_d=0.0, time=0.0,
                                            event=None),))
    cfg = dataclasses.replace(cfg, mission=plan)
    log, summary = simulate(cfg)
    return _finish(log, summary, cfg, args.degrees)


def cmd_trim(args):
    cfg = load_config(args.config) if args.config else SimConfig()
    _, cmd = hover_trim(cfg.aircraft)
    print(f"T1: {cmd.T1:.9g}")
    print(f"T2: {cmd.T2:.9g}")
    print(f"total: {cmd.T1 + cmd.T2:.9g}")
    print(f"weight: {cfg.aircraft.m * cfg.aircraft.g:.9g}")
    return EXIT_OK


def _set_key(data, key, value):
    """Set a dotted key (list items as name[i]) in a nested config dict."""
    path = []
    for part in key.split("."):
        if part.endswith("]") and "[" in part:
            name, index = part[:-1].split("[", 1)
            path += [name, index]
        else:
            path.append(part)
    node = data
    try:
        for i, part in enumerate(path):
            if isinstance(node, list):
                part = int(part)
                node[part]
            elif part not in node:
                raise KeyError(part)
            if i == len(path) - 1:
                node[part] = value
            else:
                node = node[part]
    except (KeyError, IndexError, ValueError, TypeError):
        raise ConfigValidationError(key, "unknown key") from None


def _sweep_values(args):
    if args.values:
        # YAML scalars, so integer keys such as noise.seed stay integers
        return [yaml.safe_load(v) for v in args.values.split(",")]
    if args.range:
        start, stop, num = args.range
        return [float(v) for v in np.linspace(start, stop, int(num))]
    raise ConfigValidationError("sweep", "give --values or --range")


def _sweep_one(job):
    cfg, degrees = job
    log, summary = simulate(cfg)
    logio.write_log(log, summary, cfg.output_path, degrees)
    return summary


def cmd_sweep(args):
    base = _load(args)
    values = _sweep_values(args)
    jobs = []
    for i, value in enumerate(values):
        data = config_to_dict(base)
        _set_key(data, args.key, value)
        cfg = config_from_dict(data)
        cfg = dataclasses.replace(cfg, output_path=os.path.join(base.output_path, f"run_{i:03d}"),
                                  noise=base.noise)
        jobs.append((cfg, args.degrees))
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        summaries = list(pool.map(_sweep_one, jobs))

    print(f"{args.key}\tstatus\tmax_dev_tf\tmax_dev_tr\ttouchdown_t\tthrust_hover\tthrust_forward")
    worst = EXIT_OK
    for value, s in zip(values, summaries):
        dev = s.transition_deviation
        cells = [str(value), s.status,
                 *(_cell(dev.get(m)) for m in ("transition_forward", "transition_reverse")),
                 _cell(s.touchdown_time),
                 _cell(s.thrust_mean.get("hover")), _cell(s.thrust_mean.get("forward"))]
        print("\t".join(cells))
        if s.status != "completed":
            worst = max(worst, s.failure_code or EXIT_CONTROL)
    return worst


def _cell(value):
    return "-" if value is None else f"{value:.6g}"


COMMANDS = {"run": cmd_run, "hover": cmd_hover, "trim": cmd_trim, "sweep": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigParseError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigValidationError as exc:
        print(f"config validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TiltrotorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
