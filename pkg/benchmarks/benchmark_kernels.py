#!/usr/bin/env python3
"""Benchmark the compiled integrator kernels against the numpy fallback.

Runs the same end-to-end simulation workload under both values of
SQZ_SENSOR_BACKEND and reports wall times and the speedup.  The two
paths execute identical floating-point operations, so the outputs are
also compared.

Usage:
    python3 benchmarks/benchmark_kernels.py [--steps N] [--repeats R]
"""

from __future__ import annotations

import argparse
import math
import os
import time

import numpy as np

from sqz_sensor import Scenario, SensorParams, SimulationConfig, simulate
from sqz_sensor._kernels import ENV_BACKEND, HAS_NUMBA


def workload_params() -> SensorParams:
    base = SensorParams(
        kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7, n_photons=1.0,
        r_squeeze=0.5 * math.log(30.0),
    )
    return Scenario.double_squeeze_optimal().materialize(base)


def run_once(params, config) -> tuple[float, np.ndarray]:
    start = time.perf_counter()
    run = simulate(params, config)
    return time.perf_counter() - start, run.d_s


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--method", choices=("euler", "exact"), default="euler")
    args = parser.parse_args()

    params = workload_params()
    dt = 0.02
    config = SimulationConfig(
        dt=dt, duration=args.steps * dt, seed=12345, n_segments=1,
        burn_in=0.0, method=args.method,
    )

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if not HAS_NUMBA:
        print("numba not importable; benchmarking the fallback only")

    results: dict[str, tuple[float, np.ndarray]] = {}
    for backend in backends:
        os.environ[ENV_BACKEND] = backend
        if backend == "numba":
            # warm-up call so compilation does not pollute the timing
            warm = SimulationConfig(dt=dt, duration=100 * dt, seed=1,
                                    n_segments=1, burn_in=0.0, method=args.method)
            simulate(params, warm)
        best, series = math.inf, None
        for _ in range(args.repeats):
            elapsed, d = run_once(params, config)
            if elapsed < best:
                best, series = elapsed, d
        results[backend] = (best, series)
        rate = args.steps / best / 1e6
        print(f"{backend:>6}: {best:8.3f} s for {args.steps} steps "
              f"({rate:7.2f} Msteps/s, best of {args.repeats})")
    os.environ.pop(ENV_BACKEND, None)

    if len(results) == 2:
        t_np, d_np = results["numpy"]
        t_nb, d_nb = results["numba"]
        print(f"speedup: {t_np / t_nb:.1f}x")
        print(f"max |difference| between paths: {np.max(np.abs(d_np - d_nb)):.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
