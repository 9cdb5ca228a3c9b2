"""Run a paper preset and tabulate steady-state reputation churn and utilisation.

    python scripts/reproduce_trend.py paper-homogeneous --out results/homo
    python scripts/reproduce_trend.py paper-heterogeneous --seeds 1 2 --iterations 200
"""
import argparse
import json
import statistics
from collections import defaultdict
from pathlib import Path

from bluetrust.experiment import PRESETS, preset_spec, read_series, run_experiment

START = 100


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("preset", choices=sorted(PRESETS))
    ap.add_argument("--out", default=None)
    ap.add_argument("--seeds", type=int, nargs="+")
    ap.add_argument("--iterations", type=int, help="shorten runs for a quick look")
    args = ap.parse_args()

    spec = preset_spec(args.preset)
    spec.output_dir = args.out or f"results/{args.preset}"
    if args.seeds:
        spec.seeds = args.seeds
    if args.iterations:
        spec.base.iterations = args.iterations
    run_experiment(spec, progress=lambda cfg, _: print(
        f"  done {cfg.estimator_kind:8s} alpha={cfg.alpha:<4g} seed={cfg.rng_seed}"))

    out = Path(spec.output_dir)
    groups = defaultdict(lambda: ([], []))
    for entry in json.loads((out / "manifest.json").read_text()):
        rows = [m for m in read_series(out / entry["file"]) if m.iteration >= START]
        if not rows:
            continue
        dr, util = groups[(entry["estimator"], entry["alpha"])]
        dr.append(statistics.fmean(m.delta_r_norm for m in rows))
        util.append(statistics.fmean(m.utilization for m in rows))

    print(f"\n{args.preset}: medians over {len(spec.seeds)} seed(s), iterations {START}+")
    print(f"{'estimator':10s} {'alpha':>6s} {'dR/pair':>12s} {'utilisation':>12s}")
    for (kind, alpha), (dr, util) in sorted(groups.items()):
        print(f"{kind:10s} {alpha:6g} {statistics.median(dr):12.4e} {statistics.median(util):12.4f}")


if __name__ == "__main__":
    main()
