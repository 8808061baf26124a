"""Compare the compiled and pure-Python kernels.

Times the two hot paths on identical inputs and checks that both backends
agree:

* ``dp5_block``: adaptive Dormand-Prince integration of one photon block;
* ``analytic_grid``: closed-form evaluation of every block of an
  ``nbar = 100`` state on a time grid.

Usage::

    python benchmarks/bench_kernels.py [--tau-max 10] [--points 512] [--repeat 3]
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from esdkit import _backend, analytic
from esdkit.model import FieldSpec, SystemParams, init_wavefunction, preset
from esdkit.oracle import DEFAULT_CONFIG


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_integrator(kern, tau_max, repeat):
    params = SystemParams(lambda2=4.0, j_ising=-4.0, delta=-2.0)
    l2, J, D = params.scaled()
    y0 = preset("bell_c").as_array()
    grid = np.linspace(0.0, tau_max, 101)
    n = 100
    cfg = DEFAULT_CONFIG

    def run():
        out, status, nsteps = kern.dp5_block(np.sqrt(n + 1), np.sqrt(n + 2), l2, J, D, y0, grid,
                                             cfg.rel_tol, cfg.abs_tol, cfg.max_step,
                                             cfg.max_steps)
        return out

    return best_of(run, repeat)


def bench_closed_form(kern, points, repeat):
    params = SystemParams(lambda2=4.0, j_ising=-4.0, delta=-2.0)
    psi0 = init_wavefunction(preset("bell_c"), FieldSpec(nbar=100.0))
    bp = analytic.plan(params, psi0)
    l2, J, D = params.scaled()
    grid = np.linspace(0.0, 50.0, points)

    def run():
        return kern.analytic_grid(bp.m, bp.delta, bp.init[bp.closed], bp.alpha, bp.beta,
                                  l2, J, D, grid)

    return best_of(run, repeat)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau-max", type=float, default=10.0,
                    help="integration span for the block integrator")
    ap.add_argument("--points", type=int, default=512, help="grid points for the closed form")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print results as JSON")
    args = ap.parse_args(argv)

    try:
        fast = _backend.get("cython")
    except ImportError:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    slow = _backend.get("python")

    rows = []
    for name, fn, arg in (("dp5_block", bench_integrator, args.tau_max),
                          ("analytic_grid", bench_closed_form, args.points)):
        t_c, out_c = fn(fast, arg, args.repeat)
        t_p, out_p = fn(slow, arg, max(1, args.repeat // 3))
        rows.append({"kernel": name, "cython_s": t_c, "python_s": t_p,
                     "speedup": t_p / t_c, "max_diff": float(np.max(np.abs(out_c - out_p)))})

    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'kernel':<15}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}{'max diff':>12}")
        for r in rows:
            print(f"{r['kernel']:<15}{r['cython_s']:>12.4f}{r['python_s']:>12.4f}"
                  f"{r['speedup']:>10.1f}{r['max_diff']:>12.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
