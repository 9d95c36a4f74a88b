"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from qtsp.kernels import backends


def distances(n, seed=0):
    pts = np.random.default_rng(seed).random((n, 2))
    return np.ascontiguousarray(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases():
    for n in (11, 13, 15):
        d = distances(n, n)
        yield f"held_karp n={n}", lambda impl, d=d: impl.held_karp(d)
    for n in (8, 9, 10):
        d = distances(n, n)
        yield f"enumerate_lengths n={n}", lambda impl, d=d: impl.enumerate_lengths(d)
    for n, draws in ((12, 20_000), (30, 5_000)):
        d = distances(n, n)
        u = np.random.default_rng(n).random((draws, n - 1))
        yield f"sis_draw n={n} x{draws}", lambda impl, d=d, u=u: impl.sis_draw(d, 3.0, u)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    impls = backends()
    names = sorted(impls)
    print(f"{'kernel':<28}" + "".join(f"{name:>12}" for name in names) + f"{'speedup':>10}")
    for label, fn in cases():
        t = {name: best_of(lambda: fn(impls[name]), args.repeat) for name in names}
        speedup = t["python"] / t["compiled"] if len(t) == 2 else float("nan")
        print(f"{label:<28}" + "".join(f"{t[name]:>11.4f}s" for name in names) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
