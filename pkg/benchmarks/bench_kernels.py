#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Runs each hot kernel on production-sized inputs with both backends,
verifies the outputs are bit-identical, and prints a timing table.

    python3 benchmarks/bench_kernels.py [--grid 256] [--repeat 5]
"""

import argparse
import time

import numpy as np

from terratwin._kernels import NEIGHBOR_OFFSETS, _fallback

try:
    from terratwin._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_case(name, make_args, run, check, repeat):
    args_a = make_args()
    t_py, out_py = timeit(lambda: run(_fallback, *args_a), repeat)
    row = {"kernel": name, "python": t_py, "cython": None, "speedup": None}
    if _core is not None:
        args_b = make_args()
        t_cy, out_cy = timeit(lambda: run(_core, *args_b), repeat)
        check(out_py, args_a, out_cy, args_b)
        row["cython"] = t_cy
        row["speedup"] = t_py / t_cy if t_cy > 0 else float("inf")
    return row


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--grid", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--segments", type=int, default=60)
    parser.add_argument("--events", type=int, default=400)
    args = parser.parse_args()

    n = args.grid
    rng = np.random.default_rng(0)
    xs = (np.arange(n) + 0.5) * 100.0
    ys = (n - 1 - np.arange(n) + 0.5) * 100.0
    px = rng.random(args.points) * n * 100
    py = rng.random(args.points) * n * 100
    segs = rng.random((args.segments, 4)) * n * 100
    ex = rng.random(args.events) * n * 100
    ey = rng.random(args.events) * n * 100
    edges = rng.random((40, 4)) * n * 100

    prev = rng.choice([0, 0, 0, 1, 3], size=(n, n)).astype(np.int8)
    ignite0 = np.where(prev == 1, 0, -1).astype(np.int32)
    p8 = rng.random((8, n, n))
    u = rng.random((n, n, 8))

    rows = [
        bench_case(
            f"point_min_dist2 ({args.points} pts, {n}x{n})",
            lambda: (np.full((n, n), np.inf),),
            lambda impl, d2: (impl.point_min_dist2(xs, ys, px, py, d2), d2)[1],
            lambda oa, aa, ob, ab: np.testing.assert_array_equal(oa, ob),
            args.repeat),
        bench_case(
            f"segment_min_dist2 ({args.segments} segs, {n}x{n})",
            lambda: (np.full((n, n), np.inf),),
            lambda impl, d2: (impl.segment_min_dist2(xs, ys, segs, d2),
                              d2)[1],
            lambda oa, aa, ob, ab: np.testing.assert_array_equal(oa, ob),
            args.repeat),
        bench_case(
            f"polygon_parity (40 edges, {n}x{n})",
            lambda: (np.zeros((n, n), dtype=np.uint8),),
            lambda impl, inside: (impl.polygon_parity(xs, ys, edges, inside),
                                  inside)[1],
            lambda oa, aa, ob, ab: np.testing.assert_array_equal(
                np.asarray(oa, bool), np.asarray(ob, bool)),
            args.repeat),
        bench_case(
            f"count_within_radius ({args.events} events, {n}x{n})",
            lambda: (),
            lambda impl: impl.count_within_radius(xs, ys, ex, ey, 1000.0),
            lambda oa, aa, ob, ab: np.testing.assert_array_equal(oa, ob),
            args.repeat),
        bench_case(
            f"fire_step (stochastic, {n}x{n})",
            lambda: (ignite0.copy(), np.empty_like(prev)),
            lambda impl, ig, nxt: (impl.fire_step(prev, ig, p8, u, False, 1,
                                                  3, nxt), nxt.copy())[1],
            lambda oa, aa, ob, ab: np.testing.assert_array_equal(oa, ob),
            args.repeat),
    ]

    width = max(len(r["kernel"]) for r in rows) + 2
    print(f"{'kernel':<{width}}{'python':>12}{'cython':>12}{'speedup':>10}")
    for r in rows:
        py = f"{r['python'] * 1e3:9.2f} ms"
        cy = f"{r['cython'] * 1e3:9.2f} ms" if r["cython"] is not None \
            else "   (absent)"
        sp = f"{r['speedup']:8.1f}x" if r["speedup"] is not None else "      --"
        print(f"{r['kernel']:<{width}}{py:>12}{cy:>12}{sp:>10}")
    if _core is None:
        print("\ncompiled core not built; run "
              "`python3 setup.py build_ext --inplace` first")
    else:
        print("\noutputs verified bit-identical across backends")


if __name__ == "__main__":
    main()
