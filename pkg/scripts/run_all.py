"""Run every experiment with default settings and write reports.

Usage: python scripts/run_all.py [OUT_DIR] [--jobs N]
"""

import argparse
import time
from pathlib import Path

from ggpgraph.harness import EXPERIMENTS, ExperimentConfig, default_out_dir, run_experiment, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", nargs="?", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=EXPERIMENTS, default=EXPERIMENTS)
    args = ap.parse_args()
    out = Path(args.out_dir) if args.out_dir else default_out_dir()
    failed = []
    for name in args.only:
        t0 = time.perf_counter()
        res = run_experiment(ExperimentConfig(name, n_jobs=args.jobs))
        write_report(res, out)
        print(f"== {name} ({time.perf_counter() - t0:.0f}s)")
        for line in res.criteria_lines():
            print("  " + line)
        if not res.passed:
            failed.append(name)
    print(f"reports in {out}; failing experiments: {failed or 'none'}")


if __name__ == "__main__":
    main()
