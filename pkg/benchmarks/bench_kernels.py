#!/usr/bin/env python3
"""Time the compiled kernels against the pure-numpy fallback.

Runs three representative workloads (amplitude integration, a classical
trajectory, and Crank-Nicolson propagation) in the current process, then
re-invokes itself in a subprocess with BCKOSC_NO_NUMBA=1 and prints both
columns side by side.  Kernels are warmed once before timing so JIT or
cache-load cost never lands in a measurement.
"""

import argparse
import json
import os
import pathlib
import subprocess
import sys
import time
from dataclasses import replace

HERE = pathlib.Path(__file__).resolve().parent
SCENARIO = HERE.parent / "scenarios" / "underdamped_driven.cfg"


def build_workloads():
    from bckosc import (integrate_beta, integrate_classical,
                        parse_scenario_file, propagate_and_compare)

    s = replace(parse_scenario_file(str(SCENARIO)), rtol=1e-12, atol=1e-14)
    beta_sol = integrate_beta(s)
    prop = replace(s, npoints=512)
    return [
        ("amplitude ode (20pi, rtol 1e-12)", lambda: integrate_beta(s)),
        ("classical trajectory", lambda: integrate_classical(s, 0.7, -0.3)),
        ("wave propagation (512 pts x 2000 steps)",
         lambda: propagate_and_compare(prop, 0, 0.0, 2.0, 1e-3,
                                       beta_sol=beta_sol)),
    ]


def run_current_mode(repeats):
    results = {}
    for label, fn in build_workloads():
        fn()  # warmup
        best = min(
            (lambda t0: (fn(), time.perf_counter() - t0)[1])(
                time.perf_counter())
            for _ in range(repeats))
        results[label] = best
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3,
                    help="repetitions per workload, best is kept")
    ap.add_argument("--single", action="store_true",
                    help="time only the current mode, print JSON")
    args = ap.parse_args(argv)

    if args.single:
        print(json.dumps(run_current_mode(args.repeats)))
        return 0

    accel = run_current_mode(args.repeats)

    env = dict(os.environ, BCKOSC_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, str(HERE / "bench_kernels.py"), "--single",
         "--repeats", str(max(1, args.repeats - 1))],
        env=env, capture_output=True, text=True, check=True)
    fallback = json.loads(out.stdout.strip().splitlines()[-1])

    width = max(len(k) for k in accel)
    print(f"{'workload':<{width}}  {'numba':>9}  {'numpy':>9}  speedup")
    for label, t_accel in accel.items():
        t_fb = fallback[label]
        print(f"{label:<{width}}  {t_accel:>8.4f}s  {t_fb:>8.4f}s  "
              f"{t_fb / t_accel:>6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
