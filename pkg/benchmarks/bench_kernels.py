"""Compare the numba kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--mesh 16] [--points 200000] [--repeat 5]

Times the discrete J3 gradient and Hessian assembly on an n x n plate /
2n rod mesh and the 3D St Venant-Kirchhoff quadrature used by the energy
bridge. The first numba call (compilation) is excluded from the timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from platerod import kernels
from platerod.assembly import Assembler
from platerod.discretization import build_spaces
from platerod.forces import ForceData
from platerod.geometry import Geometry
from platerod.material import LameParams
from platerod.regime import regime_from_delta


def best_of(fn, repeat):
    fn()  # warm up (compiles the numba path)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--mesh", type=int, default=16)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    g = Geometry(1.0, 1.0, 1.0, 1.0, ("left", "right"), 1.0)
    dm = build_spaces(g, (args.mesh, args.mesh, 2 * args.mesh))
    fd = ForceData.build(["0", "0", "1"], ["0", "0", "0.1"], None, None)
    r = regime_from_delta(3.0, 3.0, 0.01)
    lp = LameParams(1.0, 1.0, 1.0, 1.0)
    rng = np.random.default_rng(0)
    s = 0.05 * rng.standard_normal(dm.n_free)
    H = 0.1 * rng.standard_normal((args.points, 3, 3))
    w = rng.uniform(0.0, 1.0, args.points)

    backends = ["numpy"] + (["numba"] if kernels.use_numba() else [])
    print(f"free dofs {dm.n_free}, 3D points {args.points}, best of {args.repeat}")
    print(f"{'task':<22}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    tasks = {
        "gradient": lambda A: (lambda: A.value_gradient(s)),
        "hessian": lambda A: (lambda: A.hessian(s)),
    }
    for name, make in tasks.items():
        ts = [best_of(make(Assembler(dm, lp, fd, r, backend=b)), args.repeat) for b in backends]
        line = f"{name:<22}" + "".join(f"{t:>11.4f}s" for t in ts)
        print(line + (f"{ts[0] / ts[1]:>11.1f}x" if len(ts) == 2 else ""))
    ts = [best_of(lambda b=b: kernels.svk_integral(H, w, 1.0, 1.0, b), args.repeat) for b in backends]
    line = f"{'svk quadrature':<22}" + "".join(f"{t:>11.4f}s" for t in ts)
    print(line + (f"{ts[0] / ts[1]:>11.1f}x" if len(ts) == 2 else ""))


if __name__ == "__main__":
    main()
