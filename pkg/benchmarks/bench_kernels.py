"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--h 0.03125] [--steps 2000] [--repeat 3]

Times a fixed number of scheme steps on the half-open unit square and the
cone envelope used by the standing layer, checks that both backends give
identical arrays, and prints one line per kernel.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sandtable import backend
from sandtable.analytic import half_open_square
from sandtable.dynamics import SchemeParams, node_classes
from sandtable.grid import Grid


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_advance(h: float, steps: int, repeat: int) -> None:
    dom, gamma = half_open_square()
    grid = Grid.nodes(dom, h)
    cls = node_classes(grid, dom, gamma)
    p = SchemeParams(h=h)
    f = np.ones(grid.shape)

    def run(kern):
        u, v = np.zeros(grid.shape), np.zeros(grid.shape)
        kern.advance(u, v, f, cls.cls, cls.out_x, cls.out_y, cls.copy_i, cls.copy_j,
                     h, p.dt, steps, 0.0, p.neg_tol)
        return u, v

    times = {}
    results = {}
    for name in ("python", "cython"):
        times[name], results[name] = _best(lambda: run(backend.get(name)), repeat)
    same = all(np.array_equal(a, b) for a, b in zip(results["python"], results["cython"]))
    print(f"advance  h={h:g} nodes={grid.nx * grid.ny} steps={steps}: "
          f"python {times['python']:.3f}s  cython {times['cython']:.3f}s  "
          f"speedup {times['python'] / times['cython']:.1f}x  identical={same}")


def bench_cone(n: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    tx, ty = rng.random(n), rng.random(n)
    sx, sy, sd = rng.random(n), rng.random(n), rng.random(n)
    times, results = {}, {}
    for name in ("python", "cython"):
        kern = backend.get(name)
        times[name], results[name] = _best(lambda: kern.cone_envelope(tx, ty, sx, sy, sd), repeat)
    same = np.array_equal(results["python"], results["cython"])
    print(f"cone     targets=sources={n}: python {times['python']:.3f}s  "
          f"cython {times['cython']:.3f}s  speedup {times['python'] / times['cython']:.1f}x  "
          f"identical={same}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=1 / 32)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--cone", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        backend.get("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    bench_advance(args.h, args.steps, args.repeat)
    bench_cone(args.cone, args.repeat)


if __name__ == "__main__":
    main()
