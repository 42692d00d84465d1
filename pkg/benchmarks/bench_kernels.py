"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs the same scattering legs twice: once in-process (numba path unless the
caller already disabled it) and once in a subprocess with
FOILFLOW_DISABLE_NUMBA=1.  Reports wall time per leg and the speedup.

Usage: python benchmarks/bench_kernels.py [--legs N] [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap
import time

WORKLOAD = textwrap.dedent(
    """
    import json, math, sys, time
    import numpy as np
    from foilflow import kernels
    from foilflow.params import FoilParams
    from foilflow.reduced import momentum_on_energy_level

    legs = int(sys.argv[1])
    repeat = int(sys.argv[2])
    params = FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.01, rho=1.0)
    par = params.kernel_params(1.0)
    r_max, h, k = 100.0, 0.001, 1.0

    def one_leg(alpha, b):
        phi = alpha - math.pi + math.asin(b / r_max)
        p = momentum_on_energy_level(r_max, phi, alpha, h, k, "largest",
                                     params, 1.0)
        state = np.array([r_max * (1 - 1e-12) * math.cos(phi),
                          r_max * (1 - 1e-12) * math.sin(phi),
                          p * math.cos(alpha), p * math.sin(alpha)])
        return kernels.integrate_leg(state, k, par, h, r_max,
                                     params.R * (1 + 1e-5), 1e6, 1e-10,
                                     1e-12, 1.0, 1e-13, 1e-12, 50, True)

    one_leg(1.0, 14.0)  # warm-up (JIT compilation on the compiled path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for i in range(legs):
            one_leg(1.0 + 0.01 * i, 13.0 + i / max(legs - 1, 1))
        best = min(best, time.perf_counter() - t0)
    print(json.dumps({"enabled": kernels.NUMBA_ENABLED,
                      "seconds": best, "legs": legs}))
    """
)


def run_workload(legs: int, repeat: int, disable: bool) -> dict:
    env = dict(os.environ)
    if disable:
        env["FOILFLOW_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FOILFLOW_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(legs), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--legs", type=int, default=20,
                        help="scattering legs per timed pass")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timed passes; the best is reported")
    args = parser.parse_args()

    t0 = time.time()
    jit = run_workload(args.legs, args.repeat, disable=False)
    plain = run_workload(args.legs, args.repeat, disable=True)
    wall = time.time() - t0

    per_jit = jit["seconds"] / args.legs
    per_plain = plain["seconds"] / args.legs
    print(f"legs per pass      : {args.legs}")
    print(f"compiled path      : {per_jit * 1e3:9.2f} ms/leg "
          f"(numba enabled: {jit['enabled']})")
    print(f"numpy fallback     : {per_plain * 1e3:9.2f} ms/leg "
          f"(numba enabled: {plain['enabled']})")
    print(f"speedup            : {per_plain / per_jit:9.1f}x")
    print(f"total benchmark    : {wall:9.1f} s")
    if not jit["enabled"]:
        print("warning: compiled path ran without numba "
              "(FOILFLOW_DISABLE_NUMBA set or numba unavailable)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
