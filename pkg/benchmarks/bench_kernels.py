"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--tets 20000] [--repeat 5]

Also times a full invariant on a lens space under each backend.
"""
import argparse
import time

import numpy as np

from geotorsion import _kernels as K
from geotorsion.catalog import catalog_space
from geotorsion.torsion import invariant


def _random_lengths(T, rng):
    P = rng.normal(size=(T, 4, 3))
    return np.stack([np.linalg.norm(P[:, i] - P[:, j], axis=1) for i, j in K.EDGES], axis=1)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tets", type=int, default=20000)
    ap.add_argument("--edges", type=int, default=2000, help="F3 is dense, edges^2 floats")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--space", default="lens:9,2,4")
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    rng = np.random.default_rng(0)
    L = _random_lengths(args.tets, rng)
    n_edges = args.edges
    edge_class = rng.integers(n_edges, size=(args.tets, 6))
    sigma = rng.choice([-1.0, 1.0], size=args.tets)

    K.tet_angles_numba(L[:2])  # compile
    th_a, g_a = K.tet_angles_numpy(L)
    th_b, g_b = K.tet_angles_numba(L)
    F_a = K.assemble_F3_numpy(edge_class, sigma, g_a, n_edges)
    K.assemble_F3_numba(edge_class[:2], sigma[:2], g_a[:2], n_edges)
    F_b = K.assemble_F3_numba(edge_class, sigma, g_a, n_edges)
    print(f"max |angle diff|     {np.abs(th_a - th_b).max():.2e}")
    print(f"max |gradient diff|  {np.abs(g_a - g_b).max():.2e}")
    print(f"max |F3 diff|        {np.abs(F_a - F_b).max():.2e}")

    rows = [
        ("tet_angles", lambda: K.tet_angles_numpy(L), lambda: K.tet_angles_numba(L)),
        ("assemble_F3", lambda: K.assemble_F3_numpy(edge_class, sigma, g_a, n_edges),
         lambda: K.assemble_F3_numba(edge_class, sigma, g_a, n_edges)),
    ]
    print(f"\n{'kernel':<14}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}   T={args.tets}, edges={n_edges}")
    for name, f_np, f_nb in rows:
        a, b = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
        print(f"{name:<14}{a:>12.4f}{b:>12.4f}{a / b:>10.1f}")

    space = catalog_space(args.space)
    saved = K.USE_NUMBA
    out = {}
    for flag in (False, True):
        K.USE_NUMBA = flag
        invariant(space.tri, space.chain, space.geo)
        out[flag] = best_of(lambda: invariant(space.tri, space.chain, space.geo), args.repeat)
    K.USE_NUMBA = saved
    print(f"{'invariant':<14}{out[False]:>12.4f}{out[True]:>12.4f}{out[False] / out[True]:>10.1f}   {args.space}")


if __name__ == "__main__":
    main()
