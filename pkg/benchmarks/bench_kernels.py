"""Benchmark the compiled radial kernel against the numpy fallback.

Times the per-phase finite-volume RHS at several grid sizes and a full
RK4 solver step, then prints a comparison table.  Run from the repo
root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from baroflow import _radial_numpy
from baroflow import bubble, kernels
from baroflow.laws import GammaLaw

try:
    from baroflow import _radial_cython

    BACKENDS = [("numpy", _radial_numpy), ("cython", _radial_cython)]
except ImportError:
    print("compiled kernel not built; benchmarking the fallback only")
    BACKENDS = [("numpy", _radial_numpy)]


def time_call(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_phase_rhs():
    rng = np.random.default_rng(0)
    print(f"{'n':>6} {'backend':>8} {'us/call':>10} {'speedup':>8}")
    for n in (32, 64, 128, 256, 1024):
        rho = rng.uniform(0.5, 2.0, n)
        u = rng.uniform(-0.1, 0.1, n)
        reps = max(200, 20000 // n)
        base = None
        for name, mod in BACKENDS:
            dt = time_call(
                lambda: mod.phase_rhs(rho, u, 0.0, 1.0, 0.0, 0.1, 1.0, 1.4, 0),
                reps,
            )
            speedup = "" if base is None else f"{base / dt:7.2f}x"
            if base is None:
                base = dt
            print(f"{n:6d} {name:>8} {dt * 1e6:10.2f} {speedup:>8}")


def bench_full_step():
    n = 64
    config = bubble.SolverConfig(
        law_a=GammaLaw(1.0, 1.4), law_b=GammaLaw(1.0, 1.4),
        law_s=GammaLaw(0.1, 2.0), n_a=n, n_b=n, cfl=0.4, system="1.3",
    )
    centers = 1.0 + (np.arange(n) + 0.5) / n
    rho_b = 1.2 * (1 + 1e-3 * np.exp(-((centers - 1.5) ** 2) / 0.02))
    state = bubble.RadialTwoPhaseState.from_fields(
        0.0, 1.0, 0.0, 0.76, np.full(n, 1.0), np.zeros(n), rho_b,
        np.zeros(n), 2.0,
    )
    dt = bubble.cfl_dt(state, config)
    print(f"\nfull RK4 step, n={n} per phase ({'us/step':>8})")
    base = None
    for name, mod in BACKENDS:
        kernels.phase_rhs = mod.phase_rhs
        per = time_call(lambda: bubble.step(state, config, dt), 2000)
        speedup = "" if base is None else f"(speedup {base / per:.2f}x)"
        if base is None:
            base = per
        print(f"  {name:>8} {per * 1e6:10.2f} {speedup}")


if __name__ == "__main__":
    print(f"selected backend at import: {kernels.BACKEND}\n")
    bench_phase_rhs()
    bench_full_step()
