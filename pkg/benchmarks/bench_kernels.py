"""Time the numba and pure-numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from heatchannel import _kernels
from heatchannel.channel import Grid, make_params


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    t = np.linspace(-30.0, 30.0, 4001)
    params = make_params(1.0, 100.0, 0.01)
    grid = Grid.for_channel(params)
    f = np.exp(-grid.points() ** 2)
    cases = [
        ("hermite_table kmax=64, 4001 pts",
         lambda: _kernels.hermite_table_numpy(64, t), lambda: _kernels.hermite_table_numba(64, t)),
        ("hermite_table kmax=512, 4001 pts",
         lambda: _kernels.hermite_table_numpy(512, t), lambda: _kernels.hermite_table_numba(512, t)),
        (f"localize {grid.count} pts (alpha=1, beta=100)",
         lambda: _kernels.localize_numpy(f, grid.start, grid.step, 1.0, 100.0, params.cosh_delta),
         lambda: _kernels.localize_numba(f, grid.start, grid.step, 1.0, 100.0, params.cosh_delta)),
    ]
    # compile outside the timed region
    for _, _, nb in cases:
        nb()
    print(f"{'kernel':44s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  max |diff|")
    for name, np_fn, nb_fn in cases:
        a, b = np_fn(), nb_fn()
        tn, tb = _best(np_fn, args.repeat), _best(nb_fn, args.repeat)
        print(f"{name:44s} {1e3 * tn:11.2f} {1e3 * tb:11.2f} {tn / tb:8.1f}  {np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()
