#!/usr/bin/env python3
"""Run the full benchmark pipeline for one config: generate -> posterior -> report.

Usage:
    python scripts/run_benchmark.py configs/desk4x4.json [--jobs N] [--seed S]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mrflab.cli import main as mrflab_main


def run(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("config")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    common = ["--config", args.config, "--jobs", str(args.jobs)]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]
    for stage in ("generate", "posterior", "report"):
        t0 = time.perf_counter()
        code = mrflab_main([stage] + common)
        print(f"[{stage}] exit={code} ({time.perf_counter() - t0:.1f}s)")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
