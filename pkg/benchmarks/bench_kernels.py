"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Compiled kernels are warmed up once before timing, so JIT cost is excluded.
"""
import argparse
import timeit

import numpy as np

from hausdorff_h1 import _kernels as K
from hausdorff_h1 import homspace as hs


def cases(n, rng):
    out = []
    g, h = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
    out.append(("heis_distance H_1", "heis_distance", (g, h, 1, 1.49)))
    for m in (3, 5):
        I, J = hs.ut_pairs(m)
        a, b = rng.normal(size=(n, I.size)), rng.normal(size=(n, I.size))
        out.append((f"ut_multiply T1({m})", "ut_multiply", (a, b, I, J, m)))
        out.append((f"ut_inverse T1({m})", "ut_inverse", (a, I, J, m)))
        out.append((f"ut_left_divide T1({m})", "ut_left_divide", (a, b, I, J, m)))
        out.append((f"ut_gauge T1({m})", "ut_gauge", (a, I, J, m)))
    sides = hs.StrubleFamily(hs.GroupSpec("torus", 2)).sides
    d = hs.torus_offsets(rng.uniform(size=(n, 2)), rng.uniform(size=(n, 2)))
    out.append(("torus_symdiff_sup T^2", "torus_symdiff_sup", (np.ascontiguousarray(d), sides)))
    out.append(("heis_slice_volume m=2000", "heis_slice_volume", (1.0, 2000)))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if K.numba_backend is None:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for label, name, a in cases(args.n, rng):
        fast, slow = getattr(K.numba_backend, name), getattr(K.numpy_backend, name)
        fast(*a)
        t_np = min(timeit.repeat(lambda: slow(*a), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fast(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:28s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
