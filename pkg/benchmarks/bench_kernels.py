"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from holderlab.covering import greedy_cover, verify_cover
from holderlab.domain import build_domain
from holderlab.potentials import constant_potential, zero_potential
from holderlab.spectral import assemble, triangulate
from holderlab.spectral.inertia import inertia_report


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sq = build_domain({"flat": 1.0})
    fr = build_domain({"fractal": {"gamma": 0.75, "m": 8, "n_max": 1, "strict": False}})

    cases = []
    for h in (1 / 32, 1 / 64):
        A = assemble(triangulate(sq, h), sq, constant_potential(-1.0), 500.0).shifted(0.0)
        cases.append((f"inertia square h=1/{round(1 / h)} (n={A.shape[0]})",
                      lambda A=A, u=None: inertia_report(A, use_numba=u).triple))
    for d0 in (2.0**-4, 2.0**-5):
        cases.append((f"greedy cover fractal delta0=2^{int(np.log2(d0))}",
                      lambda d0=d0, u=None: greedy_cover(fr, zero_potential(), d0, use_numba=u).size))
    cf = greedy_cover(fr, zero_potential(), 2.0**-5)
    cases.append(("mark covered fractal delta0=2^-5",
                  lambda u=None: verify_cover(cf, fr, use_numba=u).coverage_fraction))

    print(f"{'kernel':48s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fn in cases:
        fn(u=True)  # compile
        tn, rn = best_of(lambda: fn(u=True), args.repeat)
        tp, rp = best_of(lambda: fn(u=False), 1)
        assert rn == rp, (name, rn, rp)
        print(f"{name:48s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}")


if __name__ == "__main__":
    main()
