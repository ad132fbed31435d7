"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 50]

Times each kernel at several grid sizes, then a short baseline stability
run (T = 5, N = 2000) with each backend, and checks the two runs agree.
"""

import argparse
import time

import numpy as np

from vascnet import kernels
from vascnet.experiments import Scenario, run_stability_experiment
from vascnet.grid import HalfLineGrid
from vascnet.model import BoundaryData, ModelParams, Quadratic


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_inputs(n, rng):
    rho = 1.0 + 0.1 * rng.random(n)
    m = 0.01 * rng.standard_normal(n)
    phi = 1.0 + 0.1 * rng.random(n)
    p = rho * rho
    c = np.sqrt(2.0 * rho)
    return rho, m, phi, p, c


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    mods = kernels.available()
    if "compiled" not in mods:
        print("compiled backend not built; only the numpy backend is available")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<16}{'N':>7}" + "".join(f"{k:>14}" for k in mods) + f"{'speedup':>10}")
    for n in (500, 2000, 8000):
        rho, m, phi, p, c = kernel_inputs(n, rng)
        out_r, out_m = np.empty(n), np.empty(n)
        lo = np.full(n, -1.0)
        up = np.full(n, -1.0)
        dg = np.full(n, 4.0)
        rhs = rng.random(n)
        x = np.empty(n)
        for name, call in (
            ("hyperbolic_rhs", lambda mod: mod.hyperbolic_rhs(rho, m, phi, p, c, 1.0, 1.0, 1.41,
                                                              1.2, 1.0, 0.02, 1.0, 1.0,
                                                              out_r, out_m)),
            ("thomas", lambda mod: mod.thomas(lo, dg, up, rhs, x)),
        ):
            times = {k: best_of(lambda: call(mod), args.repeat) for k, mod in mods.items()}
            ratio = times["python"] / times["compiled"] if "compiled" in times else 1.0
            print(f"{name:<16}{n:>7}" + "".join(f"{1e6 * t:>12.1f}us" for t in times.values())
                  + f"{ratio:>9.1f}x")

    params = ModelParams(1.0, 1.0, 1.0, 1.0)
    bd = BoundaryData.from_params(params, 1.0, 1.2)
    scn = Scenario(params, Quadratic(2.0), bd, HalfLineGrid(40.0, 2000), T_end=5.0)
    profile = scn.profile()
    finals = {}
    print()
    for name in mods:
        prev = kernels.use_backend(name)
        try:
            t0 = time.perf_counter()
            rep = run_stability_experiment(scn, profile, energy=False)
            dt = time.perf_counter() - t0
        finally:
            kernels.use_backend(prev)
        finals[name] = rep.final_gap
        print(f"stability run T=5 N=2000 [{name}]: {dt:.3f} s, final gap {rep.final_gap:.15e}")
    if len(finals) == 2:
        a, b = finals.values()
        print(f"relative difference between backends: {abs(a - b) / abs(a):.2e}")


if __name__ == "__main__":
    main()
