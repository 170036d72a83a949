"""Compare the compiled and pure-numpy transform kernels.

    python3 benchmarks/bench_kernels.py --res 16 --elements 1000 --repeat 3
"""

import argparse
import time

import numpy as np

from simplexft import shapes
from simplexft._backend import available
from simplexft.mesh import WeightedSimplexMesh
from simplexft.nuft import KGridSpec, auxnode_ft, mesh_ft


def random_triangles(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.1, 0.9, (n, 3, 3))
    return WeightedSimplexMesh(x.reshape(-1, 3), np.arange(3 * n).reshape(n, 3), None, 2)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--res", type=int, default=16, help="modes per axis")
    ap.add_argument("--elements", type=int, default=1000, help="random triangles")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    grid = KGridSpec((args.res,) * 3)
    cases = {
        f"mesh_ft {args.elements} triangles": lambda b: mesh_ft(random_triangles(args.elements, 0), grid, workers=args.workers, backend=b),
        "auxnode_ft bumpy sphere": lambda b: auxnode_ft(shapes.bumpy_sphere(seed=0), grid, workers=args.workers, backend=b),
    }
    backends = available()
    print(f"grid {args.res}^3, workers {args.workers}, best of {args.repeat}")
    print(f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}{'max diff':>12s}")
    for name, fn in cases.items():
        results = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:32s}" + "".join(f"{results[b][0]:11.3f}s" for b in backends)
        if len(backends) == 2:
            (ta, a), (tb, b) = results["cython"], results["python"]
            row += f"{tb / ta:9.1f}x{np.max(np.abs(a.values - b.values)):12.1e}"
        print(row)


if __name__ == "__main__":
    main()
