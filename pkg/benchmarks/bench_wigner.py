#!/usr/bin/env python3
"""Wigner-grid timing: numba kernel versus the pure-numpy fallback.

    python3 benchmarks/bench_wigner.py --dims 40 80 120 --points 101

The numpy column is what runs when ``RABIGATES_DISABLE_NUMBA=1`` is set.
"""
import argparse
import time

import numpy as np

from rabigates import TruncationConfig, ket_to_dm, run_schedule, schedule_for_target, vacuum
from rabigates._accel import HAVE_NUMBA
from rabigates._wigner_kernels import wigner_points


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[40, 80, 120])
    ap.add_argument("--points", type=int, default=201, help="grid points per axis")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    axis = np.linspace(-5, 5, args.points)
    x, p = np.meshgrid(axis, axis, indexing="ij")
    print(f"grid {args.points}x{args.points}, numba available: {HAVE_NUMBA}")
    print(f"{'dim':>5} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max |diff|':>11}")
    for dim in args.dims:
        cfg = TruncationConfig(dim=dim, guard=8)
        rho0 = ket_to_dm(vacuum(cfg))
        rho = run_schedule(rho0, schedule_for_target(0.4, 36), cfg, strict=False)
        t_np, w_np = best_of(lambda: wigner_points(rho, x, p, backend="numpy"), args.repeat)
        if HAVE_NUMBA:
            wigner_points(rho, 0.0, 0.0, backend="numba")  # compile outside the timing
            t_nb, w_nb = best_of(lambda: wigner_points(rho, x, p, backend="numba"), args.repeat)
            diff = np.max(np.abs(w_np - w_nb))
            print(f"{dim:>5} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>8.1f} {diff:>11.1e}")
        else:
            print(f"{dim:>5} {t_np:>10.3f} {'-':>10} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
