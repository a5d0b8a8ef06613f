"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per kernel
with the best-of-N wall time of each backend and the speedup.
"""
import argparse
import time

import numpy as np

from minend import hopf, kernels, reconstruct, sinhgordon


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    d = hopf.HopfData(2, (5, 0), (2j,))
    th = hopf.compute_thresholds(d)
    z0 = 1.05 * th.R2 * np.exp(0.5j * np.pi / 3)

    def trace(mod):
        return lambda: mod.trace_level_curve(d.pc, d.lc, th.C0 * 2, complex(z0), float(np.angle(z0)),
                                             1, th.R1, 1e3 * th.R2, 0.05, 0.5, 0.005, 1e-9, 200000, 30)

    g = sinhgordon.make_grid((-4, 4), (0, 6), 0.04)
    f = sinhgordon.solve(g, sinhgordon.bump_condition(g, 0.2))
    A, B, P, Q = reconstruct._coefficients(f.values, g)
    phi0 = reconstruct.seed_frame(0j, 0.0)

    def develop(mod):
        return lambda: mod.develop_frames(A, B, P, Q, g.du, g.dv, g.nu // 2, 0, phi0, 1)

    t = np.linspace(0.1, 3.0, 20000)
    zc = 0.6 * np.exp(1j * t) * (1 - 0.1 * t)

    def curvature(mod):
        return lambda: mod.polyline_curvature(zc)

    return {"trace_level_curve": trace, "develop_frames": develop, "polyline_curvature": curvature}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled extension not available; only the fallback can be timed")
    for name, make in cases().items():
        times = {k: best_of(make(m), args.repeat) for k, m in mods.items()}
        line = "  ".join(f"{k} {v * 1e3:9.2f} ms" for k, v in times.items())
        if len(times) == 2:
            line += f"  speedup x{times['python'] / times['cython']:.1f}"
        print(f"{name:20s} {line}")


if __name__ == "__main__":
    main()
