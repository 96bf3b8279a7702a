#!/usr/bin/env python3
"""Run the spec acceptance experiments and write one structured JSON report per criterion.

    python3 scripts/run_acceptance.py --out-dir results/ [--only 4 7] [--seed 0] [--workers 8] [--timing]

Reports use the same schema as the CLI (``ssexpand.reports.build_report``);
without ``--timing`` they are byte-identical across reruns and worker counts.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ssexpand import experiments
from ssexpand.reports import build_report, write_report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers (default: 1-10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--timing", action="store_true", help="record wall-clock time in the reports")
    args = p.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for number in args.only or sorted(experiments.CRITERIA):
        t0 = time.perf_counter()
        exp = experiments.run(number, seed=args.seed, workers=args.workers)
        elapsed = time.perf_counter() - t0
        timing = {"recorded": True, "wall_clock_s": elapsed, "workers": args.workers} if args.timing else None
        report = build_report(f"acceptance {number}", {"criterion": number, "seed": args.seed}, exp.data,
                              {f"criterion_{number}": exp.passed}, args.seed, timing)
        write_report(report, out / f"criterion_{number:02d}.json")
        failed += not exp.passed
        print(f"CRITERION {number:2d}: {'PASS' if exp.passed else 'FAIL'} -- {exp.detail} [{elapsed:.1f}s]", flush=True)
    return 0 if not failed else 2


if __name__ == "__main__":
    sys.exit(main())
