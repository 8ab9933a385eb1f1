"""Command-line front end: preset scenarios, custom runs, config validation.

Subcommands:
    example1 | example2 | example3   run a shipped scenario (all its runs)
    run                              run a custom config file
    validate                         check a config file without running

Errors exit nonzero with a single machine-parseable line on stderr:
`error: <key>: <message>`.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, apply_overrides, build_config, parse_config_text
from .harness import run_experiment
from .presets import PRESETS


def _add_common(sub: argparse.ArgumentParser, with_config: bool) -> None:
    if with_config:
        sub.add_argument("--config", required=(sub.prog.split()[-1] != "validate"))
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    sub.add_argument("--out", default="results", help="output directory")
    sub.add_argument("--replicas", type=int, default=None, help="override replica count")
    sub.add_argument("--seed", type=int, default=None, help="override seeds.base")
    sub.add_argument(
        "--emit-gnuplot",
        action="store_true",
        help="write a companion gnuplot script per run",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tamperid",
        description="identification of binary-sensed FIR systems under bit-flip tampering",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("example1", "example2", "example3"):
        sub = subs.add_parser(name, help=f"run the shipped {name} scenario")
        _add_common(sub, with_config=False)
    run_p = subs.add_parser("run", help="run a custom config")
    _add_common(run_p, with_config=True)
    val_p = subs.add_parser("validate", help="validate a config without running")
    val_p.add_argument("--config", required=True)
    val_p.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE"
    )
    return parser


def _load_config(path: str, overrides) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(path, f"unreadable config: {exc}") from None
    return apply_overrides(raw, overrides)


def _apply_cli_overrides(raw: dict[str, str], args) -> dict[str, str]:
    if args.replicas is not None:
        raw["replicas"] = str(args.replicas)
    if args.seed is not None:
        raw["seeds.base"] = str(args.seed)
    return raw


def _emit_gnuplot(out_dir: str, label: str) -> None:
    import os

    script = f"""set datafile separator ','
set key autotitle columnhead
set logscale x
set xlabel 'step'
set terminal pngcairo size 1000,700

set output '{label}_error.png'
plot '{label}.csv' using 1:2 with lines title 'mean squared error', \\
     '{label}.csv' using 1:10 with lines title 'fitted envelope'

set output '{label}_rate.png'
plot '{label}.csv' using 1:4 with lines title 'rate statistic'

set output '{label}_defense.png'
plot '{label}.csv' using 1:7 with lines title 'estimated flip rate 1->0', \\
     '{label}.csv' using 1:8 with lines title 'estimated flip rate 0->1'
"""
    with open(os.path.join(out_dir, f"{label}.gp"), "w", encoding="utf-8") as fh:
        fh.write(script)


def parse_and_dispatch(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            raw = _load_config(args.config, args.overrides)
            build_config(raw, label="validate")
            print("ok")
            return 0
        if args.command == "run":
            raw = _apply_cli_overrides(_load_config(args.config, args.overrides), args)
            cfgs = [build_config(raw, label="run")]
        else:
            cfgs = []
            for cfg in PRESETS[args.command]():
                raw = apply_overrides(dict(cfg.raw), args.overrides)
                raw = _apply_cli_overrides(raw, args)
                cfgs.append(build_config(raw, label=cfg.label))
        for cfg in cfgs:
            agg, manifest = run_experiment(cfg, out_dir=args.out)
            if args.emit_gnuplot:
                _emit_gnuplot(args.out, cfg.label)
            final = agg.mean["sq_error"][-1]
            print(f"{cfg.label}: replicas={cfg.replicas} final_mean_sq_error={final:.6g}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: run: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
