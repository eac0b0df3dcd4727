"""Compare the compiled and pure-python compute cores.

Times the Bessel vector routines and the two pair accumulators on synthetic
inputs and prints per-call medians plus the speedup of the extension.

    python3 benchmarks/bench_backends.py --points 400 --size 200000
"""

import argparse
import time

import numpy as np

from stdpp import _pykern

try:
    from stdpp import _ckern
except ImportError:
    _ckern = None


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def make_cases(size, points, seed=0):
    rng = np.random.default_rng(seed)
    x = np.exp(rng.uniform(np.log(1e-5), np.log(40.0), size))
    px = rng.uniform(0.0, 2.0, points)
    py = rng.uniform(0.0, 2.0, points)
    pt = rng.uniform(0.0, 5.0, points)
    u_grid = np.linspace(0.0, 1.0, 24)
    t_grid = np.linspace(0.0, 2.5, 24)
    pair_args = (px, py, pt, 2.0, 2.0, 5.0, u_grid, t_grid)
    return [
        ("kv_many(nu=1.7)", lambda core: core.kv_many(1.7, x)),
        ("xk1_many", lambda core: core.xk1_many(x)),
        ("k_accumulate", lambda core: core.k_accumulate(*pair_args)),
        ("g_accumulate",
         lambda core: core.g_accumulate(*pair_args, 0.15, 0.4)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=200000,
                        help="vector length for the Bessel routines")
    parser.add_argument("--points", type=int, default=400,
                        help="pattern size for the pair accumulators")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (median reported)")
    args = parser.parse_args()

    if _ckern is None:
        print("compiled extension not available; timing the python core only")
    cases = make_cases(args.size, args.points)

    header = "%-18s %12s %12s %9s" % ("routine", "python [ms]",
                                      "c [ms]", "speedup")
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_py = median_time(lambda: call(_pykern), args.repeats)
        if _ckern is None:
            print("%-18s %12.2f %12s %9s" % (name, 1e3 * t_py, "-", "-"))
            continue
        t_c = median_time(lambda: call(_ckern), args.repeats)
        print("%-18s %12.2f %12.2f %8.1fx"
              % (name, 1e3 * t_py, 1e3 * t_c, t_py / t_c))


if __name__ == "__main__":
    main()
