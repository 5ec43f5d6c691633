"""Check the expected squared distance constant by sampling the field.

Compares Monte-Carlo means of |y_i - y_j|^2 with p * (k_ii + k_jj - 2 k_ij)
and with half of that, in units of the Monte-Carlo standard error.

    python3 scripts/expected_distance_check.py --samples 1000000
"""

import argparse

import numpy as np

from unfold.graphs import NeighborGraph, laplacian_from_multipliers
from unfold.oracle import mc_expected_distance
from unfold.spectral import expected_squared_distances


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--gamma", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    g = NeighborGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    L = laplacian_from_multipliers(g, [1.0, 2.0, 0.5, 0.25]).toarray()
    K = np.linalg.inv(L + args.gamma * np.eye(4))
    mean, se = mc_expected_distance(L, args.gamma, args.p, args.samples, seed=args.seed)
    full = expected_squared_distances(K, args.p)
    iu = np.triu_indices(4, 1)
    print("pair   MC mean     SE        z(p)     z(p/2)")
    for i, j in zip(*iu):
        z_full = (mean[i, j] - full[i, j]) / se[i, j]
        z_half = (mean[i, j] - full[i, j] / 2) / se[i, j]
        print(f"{i}-{j}   {mean[i, j]:9.5f}  {se[i, j]:.2e}  {z_full:7.2f}  {z_half:8.1f}")


if __name__ == "__main__":
    main()
