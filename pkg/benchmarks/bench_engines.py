#!/usr/bin/env python3
"""Compare the compiled and pure Python engines on the two hot paths.

Times batch expression evaluation and a long Picard run on each
available engine, asserting along the way that both produce identical
bytes.  Speedups are informational; the parity checks are the point.

Run from the repository root:

    python3 benchmarks/bench_engines.py [--points N] [--iters N] [--repeat K]
"""

import argparse
import time

import numpy as np

from fixedlab import CompiledExpr, Domain, SelfMap
from fixedlab._core import _ENGINES
from fixedlab.sampling import splitmix64_uniform

EVAL_EXPR = "if(x<0.5, x/4 + y^2, x/5 - sqrt(abs(y)))"
PICARD_MAP = "x - x^2"


def time_best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_eval(points, repeat):
    cexpr = CompiledExpr.from_source(EVAL_EXPR, 2)
    xs = splitmix64_uniform(101, 0, points, 0.0, 1.0)
    ys = splitmix64_uniform(202, 0, points, -1.0, 1.0)
    rows = []
    results = []
    for name, engine in sorted(_ENGINES.items()):
        dt, (vals, bad) = time_best(lambda: engine.eval_many(cexpr, xs, ys), repeat)
        rows.append((name, dt, points / dt / 1e6))
        results.append((vals.tobytes(), bad.tobytes()))
    assert all(r == results[0] for r in results), "engines disagree on eval_many"
    return rows


def bench_picard(iters, repeat):
    f = SelfMap.from_expression(PICARD_MAP, Domain.interval(0, 0.5))
    d = CompiledExpr.from_source("abs(x - y)", 2)
    spec = f.domain.as_spec()
    rows = []
    results = []
    for name, engine in sorted(_ENGINES.items()):
        def run():
            return engine.picard_run(f.cexpr, d, spec, 0.5, 0.0, iters, float("inf"))
        dt, (xs, steps, reason) = time_best(run, repeat)
        assert reason == "max-iters"
        rows.append((name, dt, iters / dt / 1e6))
        results.append((xs.tobytes(), steps.tobytes()))
    assert all(r == results[0] for r in results), "engines disagree on picard_run"
    return rows


def show(title, rows, unit):
    print(title)
    base = rows[0][1]
    for name, dt, rate in rows:
        rel = base / dt
        print(f"  {name:<10} {dt * 1e3:9.2f} ms   {rate:8.2f} M{unit}/s   {rel:5.2f}x")
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1_000_000,
                    help="batch size for eval_many (default 1e6)")
    ap.add_argument("--iters", type=int, default=200_000,
                    help="iterate count for the Picard run (default 2e5)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="repetitions, best time kept (default 3)")
    args = ap.parse_args()

    print(f"engines: {', '.join(sorted(_ENGINES))}\n")
    show(f"eval_many: {EVAL_EXPR!r} on {args.points} points",
         bench_eval(args.points, args.repeat), "elem")
    show(f"picard_run: {PICARD_MAP!r} for {args.iters} iterates",
         bench_picard(args.iters, args.repeat), "iter")
    print("parity: all engines produced identical bytes")


if __name__ == "__main__":
    main()
