#!/usr/bin/env python3
"""Run every pinned figure preset into out/<preset>/ (results.csv + manifest.json).

The contour presets (fig_chain, fig_star, fig7, fig8) take a minute or two
each; pass --only to run a subset, --workers to parallelize grid points.
"""
import argparse
import sys
import time

from zenocool.presets import PRESETS, preset_sweeps
from zenocool.sweeps import write_results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output root (default ./out)")
    parser.add_argument("--only", nargs="*", default=None, help="subset of preset ids")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--include-d5", action="store_true", help="fig4: add the d=5 panel")
    args = parser.parse_args()

    ids = args.only if args.only else sorted(PRESETS)
    for preset_id in ids:
        t0 = time.time()
        sweeps = preset_sweeps(preset_id, include_d5=args.include_d5)
        csv_path, _ = write_results(sweeps, f"{args.out}/{preset_id}", workers=args.workers)
        print(f"{preset_id}: {csv_path} ({time.time() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
