"""``actionscale`` command line.

Exit codes: 0 success, 2 configuration or input error, 3 numerical-guard abort.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import experiments as ex
from .checkpoint import CheckpointError
from .config import OUT_ENV, ConfigError, ExperimentConfig, parse_config
from .grid import NumericalGuardError
from .plots import emit_plots

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("actionscale")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", metavar="DIR",
                        help=f"output directory (default: ${OUT_ENV} or ./actionscale-out)")
    common.add_argument("--seed", metavar="N", type=int, help="override the configured seed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="actionscale", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("prepare", parents=[common], help="propagate and checkpoint the prepared states")
    sub.add_parser("fig1", parents=[common], help="widths, patch action and Delta Z_0 versus T")
    sub.add_parser("fig2", parents=[common], help="overlap scans and thresholds per T")
    sub.add_parser("fig3", parents=[common], help="Berry-Voros curve with numerical curves")
    sub.add_parser("bv-scan", parents=[common], help="Berry-Voros averaged overlap scan")
    scan = sub.add_parser("overlap-scan", parents=[common], help="overlap scan for one state")
    which = scan.add_mutually_exclusive_group()
    which.add_argument("--T", type=float, help="prepared time to scan (default: largest T_list)")
    which.add_argument("--state", metavar="FILE", help="QPS1 checkpoint to scan")
    sub.add_parser("oracle", parents=[common], help="closed form against the Monte-Carlo shell oracle")
    return ap


def _config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        out = args.out
        cmd = args.command
        if cmd == "prepare":
            written = ex.run_prepare(cfg, out)
        elif cmd == "fig1":
            written = ex.run_fig1(cfg, out)
        elif cmd == "fig2":
            written = ex.run_fig2(cfg, out)
        elif cmd == "fig3":
            written = ex.run_fig3(cfg, out)
        elif cmd == "bv-scan":
            written = ex.run_bv_scan(cfg, out)
        elif cmd == "overlap-scan":
            written = ex.run_overlap_scan(cfg, out, T=args.T, state_file=args.state)
        else:
            written = ex.run_oracle(cfg, out)
        if cmd in ("fig1", "fig2", "fig3"):
            written += emit_plots(written[0].parent, [cmd])
    except (ConfigError, CheckpointError) as exc:
        print(f"actionscale: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"actionscale: numerical guard abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in written:
        print(path)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
