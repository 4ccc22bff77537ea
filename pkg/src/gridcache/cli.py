"""Command line entry point: ``gridcache {trial,sweep,certify,dump-channel}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import harness, oracle
from .channel import realize_channel
from .config import ConfigError, SimConfig, load_config
from .scenario import sample_scenario


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


_TYPES = {"float": float, "int": int, "str": str, "bool": _parse_bool}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file; flags override its values")
    group = p.add_argument_group("configuration overrides")
    for f in dataclasses.fields(SimConfig):
        if f.name == "seed":
            continue
        group.add_argument(_flag(f.name), dest=f.name, type=_TYPES[f.type], default=None, metavar=f.type.upper())
    p.add_argument("--seed", type=int, default=None, help="base seed (default: config value)")


def _config(args: argparse.Namespace) -> SimConfig:
    base = load_config(Path(args.config)) if args.config else SimConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(SimConfig)
        if f.name != "seed" and getattr(args, f.name) is not None
    }
    if args.seed is not None:
        overrides["seed"] = args.seed
    return load_config({**base.to_dict(), **overrides})


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def cmd_trial(args: argparse.Namespace) -> int:
    cfg = _config(args)
    rec = harness.run_trial(cfg)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        harness.write_trials([rec], out / "trials.csv")
    print(json.dumps(_jsonable(dataclasses.asdict(rec)), sort_keys=True, allow_nan=False))
    return 0 if not rec.violations else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    result = harness.run_sweep(
        cfg,
        R_values=_floats(args.R_values) if args.R_values else harness.DEFAULT_R_VALUES,
        theta_values=_floats(args.theta_values) if args.theta_values else harness.DEFAULT_THETA_VALUES,
        D_values=_ints(args.D_values) if args.D_values else harness.DEFAULT_D_VALUES,
        snapshots=args.snapshots,
        modes=args.modes.split(",") if args.modes else None,
    )
    for path in harness.emit(result, args.out):
        print(path)
    bad = [t for t in result.trials if t.violations]
    if bad:
        print(f"{len(bad)} trials violate constraints", file=sys.stderr)
        return 1
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    seeds = range(args.seed or 0, (args.seed or 0) + args.instances)
    rows = oracle.certify(seeds, d=args.reconstruction_degree, association_mode=args.association_mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(oracle.write_certification(rows, out / "certification.csv"))
    summary = oracle.ratio_summary(rows)
    print(json.dumps(summary, sort_keys=True))
    beaten = [r for r in rows if r.heuristic_w < r.oracle_w - 1e-9 * max(1.0, r.oracle_w)]
    infeasible = [r for r in rows if r.violations]
    if beaten or infeasible:
        print(f"{len(beaten)} instances beat the oracle, {len(infeasible)} infeasible", file=sys.stderr)
        return 1
    return 0


def cmd_dump_channel(args: argparse.Namespace) -> int:
    cfg = _config(args)
    channel = realize_channel(sample_scenario(cfg))
    print(channel.dump_csv(args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridcache", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trial", help="run one snapshot and print its record")
    _add_config_flags(p)
    p.add_argument("--out", help="directory for trials.csv")
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over R, theta, D and placement mode")
    _add_config_flags(p)
    p.add_argument("--snapshots", type=int, default=100)
    p.add_argument("--R-values", dest="R_values", help="comma-separated download rates in bits")
    p.add_argument("--theta-values", dest="theta_values", help="comma-separated transfer efficiencies")
    p.add_argument("--D-values", dest="D_values", help="comma-separated reconstruction degrees")
    p.add_argument("--modes", help="comma-separated placement modes (default: the configured one)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="compare the pipeline against exhaustive search on tiny instances")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="first instance seed")
    p.add_argument("--reconstruction-degree", dest="reconstruction_degree", type=int, default=1)
    p.add_argument("--association-mode", dest="association_mode", default="sweep_ongrid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("dump-channel", help="write the SNR array of one snapshot as CSV")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="CSV file path")
    p.set_defaults(func=cmd_dump_channel)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
