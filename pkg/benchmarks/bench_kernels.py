#!/usr/bin/env python3
"""Benchmark the numba ensemble kernel against the pure-numpy fallback.

Runs the same seeded ensemble (quartic well with a steep wall, small temperature, start on
the H = H0 orbit) through both backends, reports wall time and ns per
path-step, and checks that the two backends agree.

Usage:
    python benchmarks/bench_kernels.py [--paths N] [--t-end T] [--H0 H] [--threads K]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from singular_langevin import _kernels
from singular_langevin.diagnostics import orbit_phase_points
from singular_langevin.potential import LangevinParams, PotentialSpec
from singular_langevin.simulate import IntegratorSettings, simulate_ensemble

BACKEND_FLAG = "SINGULAR_LANGEVIN_NO_NUMBA"


def run(backend: str, spec, params, q0, p0, times, settings, seed):
    if backend == "numpy":
        os.environ[BACKEND_FLAG] = "1"
    else:
        os.environ.pop(BACKEND_FLAG, None)
    assert _kernels.backend_name() == backend
    t0 = time.perf_counter()
    res = simulate_ensemble(spec, params, q0, p0, times, settings, seed)
    return time.perf_counter() - t0, res


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=256)
    ap.add_argument("--t-end", type=float, default=2.0)
    ap.add_argument("--H0", type=float, default=1e4)
    ap.add_argument("--threads", type=int, default=None,
                    help="numba threads (sets SINGULAR_LANGEVIN_THREADS)")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    if args.threads:
        os.environ["SINGULAR_LANGEVIN_THREADS"] = str(args.threads)

    spec = PotentialSpec(((1.0, 4.0), (0.1, -12.0)))
    params = LangevinParams(1.0, 1e-3)
    settings = IntegratorSettings()
    q0, p0 = orbit_phase_points(spec, args.H0, args.paths)
    times = np.linspace(0.0, args.t_end, 5)

    if not _kernels.HAVE_NUMBA:
        print("numba not installed; nothing to compare")
        return 1
    # compile once outside the timed region
    run("numba", spec, params, q0[:2], p0[:2], times[:2], settings, args.seed)

    t_nb, r_nb = run("numba", spec, params, q0, p0, times, settings, args.seed)
    t_np, r_np = run("numpy", spec, params, q0, p0, times, settings, args.seed)
    os.environ.pop(BACKEND_FLAG, None)

    steps = int(r_nb.n_steps.sum())
    diff = max(float(np.max(np.abs(r_nb.q - r_np.q) / np.abs(r_np.q))),
               float(np.max(np.abs(r_nb.p - r_np.p) / (1.0 + np.abs(r_np.p)))))
    print(f"paths={args.paths} t_end={args.t_end} H0={args.H0:g} steps={steps} "
          f"threads={_kernels.configure_threads()}")
    print(f"{'backend':<8} {'wall [s]':>10} {'ns/step':>10}")
    for name, t in (("numba", t_nb), ("numpy", t_np)):
        print(f"{name:<8} {t:10.3f} {1e9 * t / steps:10.1f}")
    print(f"speed-up {t_np / t_nb:.1f}x   max relative state difference {diff:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
