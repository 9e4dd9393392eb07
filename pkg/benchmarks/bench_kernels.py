"""Time the hot loops on the compiled and the numpy backends.

Each backend runs in its own interpreter because the backend is fixed at
import. Usage: ``python benchmarks/bench_kernels.py [--repeat R]``.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def measure(repeat=3):
    """Seconds per workload for the backend of this interpreter, plus a
    checksum of each result so the backends can be compared."""
    from semiclassica import kernels
    from semiclassica.coherent import PhaseGrid, berezin_product, husimi
    from semiclassica.grid import default_grid
    from semiclassica.limits import cached_ground_state
    from semiclassica.phase_space import (PhasePoint, builtin_potential, flow, gaussian_bump,
                                          gibbs_symbol, hamiltonian_symbol)
    from semiclassica.weyl import weyl_of_symbol

    grid = default_grid(1)
    V = builtin_potential("doublewell")
    _, gs = cached_ground_state(V, 0.05, grid)
    pg = PhaseGrid(grid, 0.05)
    Q = berezin_product(gibbs_symbol(V, 1.0), 0.05, grid)
    W = weyl_of_symbol(gaussian_bump(PhasePoint((0.4,), (0.0,)), 0.5), 0.05, grid)
    h = hamiltonian_symbol(V)
    V2 = builtin_potential("mexicanhat")
    h2 = hamiltonian_symbol(V2)
    psi = gs.psi.values.astype(complex)

    work = {
        "husimi_field_1d": lambda: husimi(gs.psi, 0.05, pg).values,
        "berezin_apply_1d": lambda: Q.apply(psi),
        "weyl_apply_1d": lambda: W.apply(psi),
        "verlet_1d_T10": lambda: flow(h, PhasePoint((0.5,), (0.0,)), 10.0).q,
        "verlet_2d_T10": lambda: flow(h2, PhasePoint((0.5, 0.2), (0.0, 0.1)), 10.0).q,
    }
    out = {"backend": kernels.BACKEND}
    for name, fn in work.items():
        sec, res = _best(fn, repeat)
        out[name] = {"seconds": sec, "checksum": float(np.sum(np.abs(res) ** 2))}
    return out


def _child(backend, repeat):
    env = dict(os.environ)
    env.pop("SEMICLASSICA_PURE_PYTHON", None)
    if backend == "python":
        env["SEMICLASSICA_PURE_PYTHON"] = "1"
    code = ("import json, sys; sys.path.insert(0, %r); import bench_kernels as b; "
            "print(json.dumps(b.measure(%d)))" % (os.path.dirname(os.path.abspath(__file__)), repeat))
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    runs = {b: _child(b, args.repeat) for b in ("compiled", "python")}
    if runs["compiled"]["backend"] != "compiled":
        print("compiled extension not built; only the numpy backend was timed")
    print(f"{'workload':<18} {'compiled s':>11} {'numpy s':>10} {'speedup':>8} {'rel diff':>9}")
    for name in runs["python"]:
        if name == "backend":
            continue
        c, p = runs["compiled"][name], runs["python"][name]
        diff = abs(c["checksum"] - p["checksum"]) / max(abs(p["checksum"]), 1e-300)
        print(f"{name:<18} {c['seconds']:>11.4f} {p['seconds']:>10.4f} "
              f"{p['seconds'] / c['seconds']:>7.1f}x {diff:>9.1e}")


if __name__ == "__main__":
    main()
