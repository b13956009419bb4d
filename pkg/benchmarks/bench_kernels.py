#!/usr/bin/env python3
"""Benchmark the hot assembly kernels: numba @njit loops vs pure numpy.

Builds a 64x64 state, runs every kernel under both backends, reports
timings and the worst relative disagreement.  Run directly:

    python benchmarks/bench_kernels.py [--nx 64] [--repeat 5]

The first numba call includes JIT compilation; it is excluded by a
warmup pass (compiled code is cached on disk afterwards).
"""

import argparse
import time

import numpy as np

from slipfsi import kernels
from slipfsi.geometry import build_reference_mesh, interface_grid, unit_square
from slipfsi.spaces import FluidSpaces


def build_inputs(nx):
    mesh = build_reference_mesh(unit_square(), (nx, nx))
    grid = interface_grid(mesh)
    spc = FluidSpaces(mesh, grid)
    rng = np.random.default_rng(42)
    ncell, nq = len(mesh.cells), spc.nq

    B = 0.05 * rng.standard_normal((len(mesh.nodes), 2))
    coefs_q1 = np.ascontiguousarray(B[mesh.cells])
    u = rng.standard_normal(spc.n_udof)
    coefs_q2 = np.ascontiguousarray(spc.u_cellwise(u))
    G = kernels.get_impl("numpy")["grad_nodal"](coefs_q1, spc.dN1, spc.scale)
    _, Finv, _ = kernels.get_impl("numpy")["jac_inv_sup"](G)
    g2 = kernels.get_impl("numpy")["tgrad_basis"](spc.dN2, spc.scale, Finv)
    w = np.ascontiguousarray(spc.warea)
    adv = rng.standard_normal((ncell, nq, 2))
    f = rng.standard_normal((ncell, nq, 2))
    T = rng.standard_normal((ncell, nq, 2, 2))

    return {
        "grad_nodal": (coefs_q2, spc.dN2, spc.scale),
        "eval_nodal": (coefs_q2, spc.N2),
        "jac_inv_sup": (np.ascontiguousarray(G),),
        "mass_elem": (w, spc.N2),
        "tgrad_basis": (spc.dN2, spc.scale, np.ascontiguousarray(Finv)),
        "visc_elem": (np.ascontiguousarray(g2), w),
        "adv_elem": (np.ascontiguousarray(adv), np.ascontiguousarray(g2), spc.N2, w),
        "div_elem": (spc.N1, np.ascontiguousarray(g2), w),
        "wdot": (w, np.ascontiguousarray(f), np.ascontiguousarray(f)),
        "wfrob": (w, np.ascontiguousarray(T), np.ascontiguousarray(T)),
    }


def rel_diff(a, b):
    if isinstance(a, tuple):
        return max(rel_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.abs(a).max(), 1e-30)
    return float(np.abs(a - b).max() / scale)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inputs = build_inputs(args.nx)
    np_impl = kernels.get_impl("numpy")
    try:
        nb_impl = kernels.get_impl("numba")
    except ImportError:
        print("numba is not installed; nothing to compare")
        return

    print(f"mesh {args.nx}x{args.nx}, {args.repeat} repetitions per kernel")
    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}{'rel diff':>11}")
    for name, argsk in inputs.items():
        nb_impl[name](*argsk)  # warmup / compile
        times = {}
        results = {}
        for label, impl in (("numpy", np_impl), ("numba", nb_impl)):
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = impl[name](*argsk)
                best = min(best, time.perf_counter() - t0)
            times[label] = best * 1e3
            results[label] = out
        diff = rel_diff(results["numpy"], results["numba"])
        ratio = times["numpy"] / times["numba"]
        print(f"{name:<14}{times['numpy']:>12.3f}{times['numba']:>12.3f}{ratio:>9.2f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
