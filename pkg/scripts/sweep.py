#!/usr/bin/env python3
"""Small-m benchmark sweep.

For every specification, run ``synthesize`` for m = 1, 2, ... until the
first optimal result (or ``--max-gates``) and print one RunReport JSON
object per run. Without spec arguments a seeded batch of random n <= 3
permutation specs is used.

    python scripts/sweep.py --count 20 --max-gates 5 > runs.jsonl
    python scripts/sweep.py tests/fixtures/example1.spec --max-gates 4
"""
import argparse
import random
import sys

from mctsynth.cli import RunReport
from mctsynth.search import SearchOptions, Status, synthesize
from mctsynth.spec_io import OutputPattern, Specification, read_spec


def random_specs(count: int, seed: int):
    rng = random.Random(seed)
    for i in range(count):
        n = rng.choice([2, 3])
        images = list(range(1 << n))
        rng.shuffle(images)
        rows = tuple(OutputPattern.exact(v, n) for v in images)
        yield f"random-{seed}-{i}", Specification(n, rows)


def sweep(name, spec, max_gates, time_limit, symmetry):
    for m in range(1, max_gates + 1):
        out = synthesize(spec, m, SearchOptions(time_limit=time_limit, symmetry_pruning=symmetry, workers=1))
        report = RunReport(
            command=["sweep", name, str(m)],
            spec=name,
            n=spec.n,
            m=m,
            status=out.status.value,
            cost=out.cost,
            runtime_seconds=round(out.elapsed, 6),
            nodes_explored=out.nodes_explored,
            circuit=None if out.circuit is None else out.circuit.to_text(),
        )
        print(report.to_json(), flush=True)
        if out.status is not Status.INFEASIBLE:
            break


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("specs", nargs="*", help="spec files (default: random n <= 3 permutations)")
    ap.add_argument("--max-gates", type=int, default=6)
    ap.add_argument("--time-limit", type=float, default=60.0, help="seconds per run")
    ap.add_argument("--count", type=int, default=10, help="random specs when none are given")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-symmetry", action="store_true")
    args = ap.parse_args(argv)

    if args.specs:
        jobs = [(path, read_spec(path)) for path in args.specs]
    else:
        jobs = list(random_specs(args.count, args.seed))
    for name, spec in jobs:
        sweep(name, spec, args.max_gates, args.time_limit, not args.no_symmetry)
    return 0


if __name__ == "__main__":
    sys.exit(main())
