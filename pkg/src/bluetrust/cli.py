"""Command-line driver.

    bluetrust run --preset paper-homogeneous --out results/ --seed 1 2 3
    bluetrust run --config sweep.yaml
    bluetrust presets paper-heterogeneous   # print a preset as YAML
"""
from __future__ import annotations

import argparse
import logging
import statistics
import sys

import yaml

from .experiment import PRESETS, SpecError, load_spec, preset_spec, run_experiment, spec_to_dict
from .trust import DomainError

log = logging.getLogger("bluetrust")

SUMMARY_FROM = 100  # first iteration of the reported steady-state window


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bluetrust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation sweep and write CSV series")
    run.add_argument("--config", help="YAML experiment file")
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--seed", type=_u64, nargs="+", help="seeds (override the config)")
    run.add_argument("-q", "--quiet", action="store_true")

    show = sub.add_parser("presets", help="print a preset as a YAML config")
    show.add_argument("name", choices=sorted(PRESETS))
    return parser


def _report(cfg, report):
    tail = [m.delta_r_norm for m in report.metrics if m.iteration >= SUMMARY_FROM]
    util = [m.utilization for m in report.metrics if m.iteration >= SUMMARY_FROM]
    if tail:
        log.info("%-13s %-8s alpha=%-5g seed=%-4d mean dR/pair=%.3e util=%.3f",
                 cfg.population.mode, cfg.estimator_kind, cfg.alpha, cfg.rng_seed,
                 statistics.fmean(tail), statistics.fmean(util))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        yaml.safe_dump(spec_to_dict(preset_spec(args.name)), sys.stdout, sort_keys=False)
        return 0

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")
    if args.config is None and args.preset is None:
        print("bluetrust run: one of --config or --preset is required", file=sys.stderr)
        return 2
    try:
        spec = load_spec(args.config, args.preset)
        if args.out:
            spec.output_dir = args.out
        if args.seed:
            spec.seeds = list(args.seed)
        paths = run_experiment(spec, progress=_report)
    except (SpecError, DomainError, OSError) as exc:
        print(f"bluetrust run: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %d series and %s", len(paths) - 1, paths[-1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
