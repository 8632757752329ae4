#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

The package selects the kernel flavor once at import time from the
ADSCMC_NO_NUMBA environment variable; here both flavors are called
directly so a single process can time the comparison.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from adscmc import _kernels
from adscmc.torus import LatticePair
from adscmc.solver import TorusGraph, _padded_coords


def time_fn(fn, *args, repeats=5):
    fn(*args)  # warm-up (and numba compilation)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_orbit_h(n, repeats):
    lat = LatticePair((1.0, 0.0), (0.0, 1.0))
    t = np.arange(n) / n
    u = np.pi / 4 + 0.1 * np.outer(np.sin(2 * np.pi * t), np.cos(2 * np.pi * t))
    graph = TorusGraph(lat, u)
    u_pad, t_pad, s_pad, ha, hb = _padded_coords(graph)
    t_numpy = time_fn(_kernels.orbit_h_grid_numpy, u_pad, t_pad, s_pad, ha, hb, repeats=repeats)
    t_numba = time_fn(_kernels.orbit_h_grid_numba, u_pad, t_pad, s_pad, ha, hb, repeats=repeats)
    ref = _kernels.orbit_h_grid_numpy(u_pad, t_pad, s_pad, ha, hb)
    alt = _kernels.orbit_h_grid_numba(u_pad, t_pad, s_pad, ha, hb)
    assert np.max(np.abs(ref - alt)) < 1e-11
    return f"orbit mean-curvature sweep {n}x{n}", t_numpy, t_numba


def bench_brute_hull(n_pts, repeats):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(n_pts, 3))
    eps = 1e-10 * np.max(np.ptp(pts, axis=0))
    t_numpy = time_fn(_kernels.nonsplitting_triangles_numpy, pts, eps, repeats=repeats)
    t_numba = time_fn(_kernels._nonsplitting_mask_numba, pts, eps, repeats=repeats)
    a = set(_kernels.nonsplitting_triangles_numpy(pts, eps))
    b = {tuple(map(int, row)) for row in _kernels._nonsplitting_mask_numba(pts, eps)}
    assert a == b
    return f"brute-force hull oracle {n_pts} points", t_numpy, t_numba


def bench_achronal(n_r, n_phi, repeats):
    from adscmc.surfaces import PolarGrid, graph_surface_from_curve, synth_boundary_curve

    curve = synth_boundary_curve(a={2: 0.2}, b={3: 0.1}, n_samples=n_phi)
    surf = graph_surface_from_curve(curve, PolarGrid(n_r, n_phi))
    pts = surf.grid.nodes().reshape(-1, 3)
    f = surf.f.reshape(-1)
    interior = surf.grid.interior_mask().reshape(-1)
    t_numpy = time_fn(_kernels.achronal_violations_numpy, pts, f, interior, 1e-12, repeats=repeats)
    t_numba = time_fn(_kernels._achronal_violations_numba, pts, f, interior, 1e-12, repeats=repeats)
    return f"pairwise achronality scan {n_r * n_phi} nodes", t_numpy, t_numba


def bench_smoothed_sheet(n_planes, n_pts, repeats):
    rng = np.random.default_rng(2)
    tilts = 0.25 * rng.standard_normal((n_planes, 2))
    normals = np.column_stack([tilts, np.ones(n_planes)])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = 0.2 + 0.01 * rng.standard_normal(n_planes)
    x = rng.uniform(-0.5, 0.5, n_pts)
    y = rng.uniform(-0.5, 0.5, n_pts)
    t_numpy = time_fn(_kernels.smoothed_sheet_eval_numpy, normals, offsets, 0.02, 1.0, x, y, repeats=repeats)
    t_numba = time_fn(_kernels.smoothed_sheet_eval_numba, normals, offsets, 0.02, 1.0, x, y, repeats=repeats)
    ref = _kernels.smoothed_sheet_eval_numpy(normals, offsets, 0.02, 1.0, x, y)
    alt = _kernels.smoothed_sheet_eval_numba(normals, offsets, 0.02, 1.0, x, y)
    assert np.max(np.abs(ref - alt)) < 1e-12
    return f"smoothed plane envelope {n_planes} planes x {n_pts} points", t_numpy, t_numba


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    if not _kernels.NUMBA_ENABLED:
        print("numba is unavailable or disabled (ADSCMC_NO_NUMBA); nothing to compare")
        return

    repeats = 3 if args.quick else 7
    rows = [
        bench_orbit_h(32 if args.quick else 64, repeats),
        bench_brute_hull(30 if args.quick else 50, repeats),
        bench_achronal(9 if args.quick else 17, 24 if args.quick else 48, repeats),
        bench_smoothed_sheet(200 if args.quick else 600, 2000 if args.quick else 8000, repeats),
    ]

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'kernel':<{width}}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    print("-" * (width + 34))
    for name, t_np, t_nb in rows:
        print(f"{name:<{width}}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
