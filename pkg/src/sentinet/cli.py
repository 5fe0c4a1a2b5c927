"""Experiment runner: single runs, parameter sweeps, and fault injection.

Configuration resolves in layers: built-in defaults, then a flat key=value
config file (--config), then explicit flags; SENTINET_SEED overrides the
seed when set. Every output directory receives the fully resolved
configuration, so any result can be reproduced from its own echo.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import HAZARD_FEEDBACK_MODES, LinkControlMode, RunConfig
from .engine import RNG_NAME
from .metrics import meta_line
from .sim import run_simulation, write_outputs

AGGREGATE_HEADER = "axis_value,rep,energy_total_j,energy_mean_j,components,coverage_final"

_FLAG_TO_KEY = {
    "nodes": "nodes", "field": "field", "duration": "duration", "seed": "seed",
    "lam": "lambda", "beta": "beta", "link_control": "link_control",
    "lqi_threshold": "lqi_threshold", "tx_levels": "tx_levels",
    "sensing_range": "sensing_range", "grid_step": "grid_step", "tw": "tw",
    "tc_min": "tc_min", "tc_max": "tc_max",
    "shadowing_sigma": "shadowing_sigma", "metric_interval": "metric_interval",
    "hazard_feedback": "hazard_feedback",
}


class CliError(Exception):
    pass


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--field", metavar="WxH")
    parser.add_argument("--duration", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--link-control",
                        choices=[m.value for m in LinkControlMode])
    parser.add_argument("--lqi-threshold", type=int)
    parser.add_argument("--tx-levels", metavar="DBM,DBM,...",
                        help="ascending levels; use --tx-levels=-10,-5 "
                             "(leading dash needs the = form)")
    parser.add_argument("--sensing-range", type=float)
    parser.add_argument("--grid-step", type=float)
    parser.add_argument("--tw", type=float)
    parser.add_argument("--tc-min", type=float)
    parser.add_argument("--tc-max", type=float)
    parser.add_argument("--shadowing-sigma", type=float)
    parser.add_argument("--metric-interval", type=float)
    parser.add_argument("--hazard-feedback", choices=HAZARD_FEEDBACK_MODES)
    parser.add_argument("--config", metavar="FILE")
    parser.add_argument("--out", required=True, metavar="DIR")
    parser.add_argument("--force", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentinet",
        description="Self-healing sensor-network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one simulation")
    _common_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run one axis point per value x repetitions")
    _common_flags(sweep_p)
    sweep_p.add_argument("--axis", required=True,
                         choices=["beta", "nodes", "link_control"])
    sweep_p.add_argument("--values", required=True, metavar="V1,V2,...")
    sweep_p.add_argument("--reps", type=int, default=1)

    inject_p = sub.add_parser("inject", help="run with fault injection")
    _common_flags(inject_p)
    inject_p.add_argument("--kill", action="append", default=[], metavar="SPEC",
                          help="sentinels-at=T[:count=K] or node=ID:at=T")
    inject_p.add_argument("--healing-epsilon", type=float, default=0.05)
    return parser


def parse_config_file(path: str) -> dict[str, str]:
    flat: dict[str, str] = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        flat[key.strip()] = value.strip()
    return flat


def resolve_config(args: argparse.Namespace,
                   overrides: dict[str, str] | None = None) -> RunConfig:
    flat: dict[str, str] = {}
    if args.config:
        flat.update(parse_config_file(args.config))
    for attr, key in _FLAG_TO_KEY.items():
        value = getattr(args, attr, None)
        if value is not None:
            flat[key] = str(value)
    if overrides:
        flat.update(overrides)
    env_seed = os.environ.get("SENTINET_SEED")
    if env_seed is not None:
        flat["seed"] = env_seed
    source = args.config if args.config else "configuration"
    try:
        return RunConfig.from_flat(flat)
    except (ValueError, KeyError) as exc:
        raise CliError(f"{source}: {exc}") from exc


def prepare_out_dir(path: str, force: bool) -> None:
    if os.path.isdir(path) and os.listdir(path) and not force:
        raise CliError(f"output directory {path!r} is not empty (use --force)")
    os.makedirs(path, exist_ok=True)


def parse_kill_spec(spec: str) -> dict:
    fields = {}
    for part in spec.split(":"):
        key, sep, value = part.partition("=")
        if not sep:
            raise CliError(f"bad --kill spec {spec!r}: expected key=value parts")
        fields[key.strip()] = value.strip()
    try:
        if "sentinels-at" in fields:
            count = int(fields["count"]) if "count" in fields else None
            return {"kind": "sentinels", "time": float(fields["sentinels-at"]),
                    "count": count}
        if "node" in fields:
            return {"kind": "node", "node": int(fields["node"]),
                    "time": float(fields["at"])}
    except (KeyError, ValueError) as exc:
        raise CliError(f"bad --kill spec {spec!r}: {exc}") from exc
    raise CliError(f"bad --kill spec {spec!r}: need sentinels-at=T or node=ID:at=T")


def _cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    prepare_out_dir(args.out, args.force)
    result = run_simulation(config)
    paths = write_outputs(result, args.out)
    print(f"run complete: {paths['metrics']}")
    return 0


def _axis_values(axis: str, text: str) -> list[str]:
    values = [v.strip() for v in text.split(",") if v.strip()]
    if not values:
        raise CliError("--values must list at least one value")
    try:
        if axis == "nodes":
            [int(v) for v in values]
        elif axis == "beta":
            [float(v) for v in values]
        else:
            for v in values:
                LinkControlMode(v)
    except ValueError as exc:
        raise CliError(f"bad --values for axis {axis}: {exc}") from exc
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.reps < 1:
        raise CliError("--reps must be >= 1")
    values = _axis_values(args.axis, args.values)
    prepare_out_dir(args.out, args.force)
    base = resolve_config(args)
    aggregate = []
    for value in values:
        for rep in range(args.reps):
            overrides = {args.axis: value, "seed": str(base.seed + rep)}
            config = resolve_config(args, overrides)
            sub = os.path.join(args.out, f"{args.axis}_{value}_rep{rep}")
            prepare_out_dir(sub, args.force)
            result = run_simulation(config)
            write_outputs(result, sub)
            totals = result.summary["totals"]
            aggregate.append((value, rep, totals["energy"]["total_j"],
                              totals["energy"]["mean_per_node_j"],
                              totals["components_final"],
                              totals["coverage_final"]))
    agg_path = os.path.join(args.out, "aggregate.csv")
    with open(agg_path, "w") as fh:
        fh.write(meta_line(base.seed, base.config_hash(), RNG_NAME) + "\n")
        fh.write(AGGREGATE_HEADER + "\n")
        for value, rep, total, mean, comps, cov in aggregate:
            fh.write(f"{value},{rep},{total!r},{mean!r},{comps},{cov!r}\n")
    print(f"sweep complete: {agg_path}")
    return 0


def _cmd_inject(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    specs = [parse_kill_spec(s) for s in args.kill]
    node_failures = []
    sentinel_failures = []
    for spec in specs:
        if spec["time"] > config.duration:
            print(f"warning: kill at t={spec['time']} is beyond the "
                  f"{config.duration}s horizon; skipped", file=sys.stderr)
            continue
        if spec["kind"] == "node":
            node_failures.append((spec["node"], spec["time"]))
        else:
            sentinel_failures.append((spec["time"], spec["count"]))
    prepare_out_dir(args.out, args.force)
    try:
        result = run_simulation(config, failures=node_failures,
                                sentinel_failures=sentinel_failures)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    paths = write_outputs(result, args.out, healing_epsilon=args.healing_epsilon)
    print(f"inject complete: {paths['healing']}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "inject": _cmd_inject}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
