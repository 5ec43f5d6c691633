"""Support recovery of a sparse chain precision as the L1 penalty varies.

Samples p feature columns from N(0, T^-1) with T tridiagonal, fits DRILL over
a grid of rho and prints edge recall and false-edge rate per seed.

    python3 scripts/drill_rho_sweep.py --n 15 --p 500 --seeds 10
"""

import argparse

import numpy as np

from unfold.models.drill import drill_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=15)
    ap.add_argument("--p", type=int, default=500)
    ap.add_argument("--coupling", type=float, default=0.4)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    n = args.n
    T = (np.eye(n) + np.diag(np.full(n - 1, args.coupling), 1)
         + np.diag(np.full(n - 1, args.coupling), -1))
    C = np.linalg.cholesky(np.linalg.inv(T))
    off = ~np.eye(n, dtype=bool)
    true_edge = (T != 0) & off
    grid = np.geomspace(1.0, 200.0, 12)
    print("seed  " + "  ".join(f"{r:>11.1f}" for r in grid))
    for seed in range(args.seeds):
        Y = C @ np.random.default_rng(seed).standard_normal((n, args.p))
        cells = []
        for rho in grid:
            est = (np.abs(drill_fit(Y, rho).precision) > 1e-8) & off
            recall = (est & true_edge).sum() / true_edge.sum()
            false = (est & ~true_edge).sum() / (off & ~true_edge).sum()
            cells.append(f"{recall:4.2f}/{false:4.2f}{'*' if recall >= 0.9 and false <= 0.1 else ' '}")
        print(f"{seed:4d}  " + "  ".join(cells))
    print("cells are recall/false-edge rate; * marks recall >= 0.9 with false rate <= 0.1")


if __name__ == "__main__":
    main()
