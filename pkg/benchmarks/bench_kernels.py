"""Time the numba and numpy versions of the two hot kernels.

    python benchmarks/bench_kernels.py [--sizes 10 20 40 80] [--repeat 50]

Both versions are imported directly, so the DEPLAB_DISABLE_NUMBA flag does
not matter here. The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from deplab._kernels import arc_degrees_nb, arc_degrees_np, chu_liu_edmonds_nb, chu_liu_edmonds_np
from deplab.synthetic import random_tree


def median_time(fn, args, repeat):
    times = []
    for a in args[:repeat]:
        t0 = time.perf_counter()
        fn(a)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    chu_liu_edmonds_nb(rng.normal(size=(4, 4)))
    arc_degrees_nb(random_tree(rng, 3).heads())

    print(f"{'kernel':<12}{'n':>5}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for n in args.sizes:
        mats = [rng.normal(size=(n + 1, n + 1)) for _ in range(args.repeat)]
        heads = [random_tree(rng, n).heads() for _ in range(args.repeat)]
        for name, nb, npf, data in (("cle", chu_liu_edmonds_nb, chu_liu_edmonds_np, mats),
                                    ("degrees", arc_degrees_nb, arc_degrees_np, heads)):
            for a in data[:3]:
                assert np.array_equal(nb(a), npf(a))
            t_nb = median_time(nb, data, args.repeat)
            t_np = median_time(npf, data, args.repeat)
            print(f"{name:<12}{n:>5}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
