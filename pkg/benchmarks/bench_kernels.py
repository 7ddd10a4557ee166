"""Compare the compiled kernels with the numpy/scipy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each kernel runs on identical inputs with both backends; the script reports
the best wall time per backend, the speed-up and the max abs difference of
the outputs.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from sharplimit.kernels import get_backend
from sharplimit.orientation import V_CAP
from sharplimit.potential import make_standard
from sharplimit.standing_wave import compute_standing_wave


def _cases(prof):
    dth = np.ascontiguousarray(prof.dtheta)
    wq = np.ascontiguousarray(prof.quad_weights * prof.weight)
    h, c0 = prof.h, prof.c0
    Vs = np.linspace(-10.0, 10.0, 41)

    def phi_table(k):
        return k.phi_table(dth, wq, h, Vs, 150.0, 1.0, V_CAP)

    def kinetic(k):
        f = 150.0 * np.ascontiguousarray(-dth)
        f[0] = f[-1] = 0.0
        F = np.full(2000, -2.0)
        Vout = np.empty_like(F)
        k.kinetic_run(f, dth, wq, c0, h, 0.01, 150.0, 1e-5, F, Vout, 1e12)
        return np.concatenate([f, Vout])

    x = np.linspace(-4.0, 4.0, 8001)
    eps = 0.01
    W = make_standard()
    w1, w2 = W.coefficients(1), W.coefficients(2)

    def pde(k):
        rho = np.ascontiguousarray(prof.evaluate(x / eps))
        P = np.ascontiguousarray(prof.evaluate(x / eps, derivative=True))
        F = np.full(300, -2.0)
        Fout = np.empty_like(F)
        k.pde_run(rho, P, w1, w2, x[1] - x[0], eps, 150.0, eps, 1e-6, F, False, Fout, 1e12)
        return np.concatenate([rho, P])

    n = 20001
    rng = np.random.default_rng(0)
    a, c = -np.ones(n), -np.ones(n)
    b = 4.0 + rng.random(n)
    d = rng.random(n)

    def thomas(k):
        return np.asarray(k.thomas(a, b, c, d))

    return {"thomas (n=20001)": thomas, "phi_table (41 velocities)": phi_table,
            "kinetic_run (2000 steps)": kinetic, "pde_run (300 steps, N=8001)": pde}


def _best(fn, k, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(k)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)
    prof = compute_standing_wave(make_standard())
    py = get_backend("python")
    try:
        cy = get_backend("compiled")
    except ImportError:
        cy = None
        print("compiled kernels not built; timing the fallback only")
    rows = []
    print(f"{'kernel':32s} {'python [s]':>11s} {'compiled [s]':>13s} {'speed-up':>9s} {'max diff':>10s}")
    for name, fn in _cases(prof).items():
        tp, op = _best(fn, py, args.repeat)
        if cy is not None:
            tc, oc = _best(fn, cy, args.repeat)
            diff = float(np.max(np.abs(np.asarray(op) - np.asarray(oc))))
            rows.append({"kernel": name, "python_s": tp, "compiled_s": tc,
                         "speedup": tp / tc, "max_abs_diff": diff})
            print(f"{name:32s} {tp:11.4f} {tc:13.4f} {tp / tc:9.1f} {diff:10.2e}")
        else:
            rows.append({"kernel": name, "python_s": tp})
            print(f"{name:32s} {tp:11.4f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return rows


if __name__ == "__main__":
    main()
