#!/usr/bin/env python3
"""
Benchmark run over the problems shipped in benchmarks/.
Counts every problem and solves the ones marked solvable at desk scale.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

# Add the engine directory to the Python path
sys.path.append(str(Path(__file__).parent.parent / "engine"))

from schubert.services.combinatorics import format_lr_rule, lr_number
from schubert.services.file_store import FileStore
from schubert.services.geometry import random_instance
from schubert.services.linalg import RandomSource
from schubert.services.solver import SchubertSolver, SolveOptions

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

BENCHMARK_DIR = Path(__file__).parent.parent / "benchmarks"

# (file, expected count, solve numerically)
BENCHMARKS = [
    ("four_lines.json", 2, True),
    ("gr36_42.json", 42, True),
    ("gr48_1530.json", 1530, False),
]


def run_benchmark(store: FileStore, filename: str, expected: int, solve: bool, seed: int) -> dict:
    problem = store.read_problem(str(BENCHMARK_DIR / filename))
    started = time.perf_counter()
    count = lr_number(problem)
    result = {
        "file": filename,
        "count": count,
        "lr_rule": format_lr_rule(problem),
        "count_seconds": round(time.perf_counter() - started, 3),
        "count_ok": count == expected,
    }
    logger.info(f"{filename}: {result['lr_rule']} ({result['count_seconds']}s)")
    if not solve:
        return result

    rng = RandomSource(seed)
    instance = random_instance(problem, rng.substream(0))
    report = SchubertSolver(SolveOptions(), rng.substream(1)).solve(instance)
    result.update(
        {
            "solved": report.count,
            "solve_ok": report.count == expected,
            "seeding": report.seeding,
            "max_residual": max(report.residuals, default=0.0),
            "solve_seconds": round(report.timings.get("total", 0.0), 3),
            "paths": report.path_stats.as_dict(),
        }
    )
    logger.info(f"{filename}: {report.count}/{expected} solutions in {result['solve_seconds']}s")
    return result


def main():
    parser = argparse.ArgumentParser(description="Run the shipped Schubert benchmarks")
    parser.add_argument("--seed", type=int, default=1, help="random seed for the solves")
    parser.add_argument("--count-only", action="store_true", help="skip numerical solving")
    parser.add_argument("--out", default=os.path.join("data", "benchmarks_latest.json"))
    args = parser.parse_args()

    store = FileStore()
    results = []
    for filename, expected, solve in BENCHMARKS:
        try:
            results.append(run_benchmark(store, filename, expected, solve and not args.count_only, args.seed))
        except Exception as e:
            logger.error(f"Error running {filename}: {str(e)}")
            results.append({"file": filename, "error": str(e)})

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, 'w', encoding='utf-8') as f:
        json.dump(results, f, indent=2)
    logger.info(f"Saved benchmark results to {args.out}")

    failed = [r["file"] for r in results if "error" in r or not r.get("count_ok") or r.get("solve_ok") is False]
    if failed:
        logger.error(f"Benchmarks off target: {failed}")
        sys.exit(1)


if __name__ == "__main__":
    main()
