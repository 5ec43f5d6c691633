"""Score every method on seeded swiss rolls and count wins over unit-weight
Laplacian eigenmaps.

    python3 scripts/swiss_roll_ranking.py --seeds 10 --n 200
"""

import argparse
import time

import numpy as np

from unfold.datasets import swiss_roll
from unfold.eval import compare_methods

METHODS = ("le", "isomap", "meu", "alle", "drill", "lle", "pca")


def run(seeds, n, k, noise=0.0, methods=METHODS):
    table = {m: [] for m in methods}
    for seed in range(seeds):
        d = swiss_roll(n, noise=noise, seed=seed)
        rows = compare_methods(d.Y, methods, q=2, params={"k": k})
        for r in rows:
            table[r.method].append(np.nan if r.score is None else r.score)
        line = "  ".join(f"{r.method}={r.score:.1f}" if r.score is not None
                         else f"{r.method}=FAILED" for r in rows)
        print(f"seed {seed}: {line}", flush=True)
    return {m: np.array(v) for m, v in table.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--noise", type=float, default=0.0)
    args = ap.parse_args()
    t0 = time.perf_counter()
    scores = run(args.seeds, args.n, args.k, args.noise)
    base = scores["le"]
    print()
    for m, s in scores.items():
        if m == "le":
            continue
        print(f"{m:>7}: beats le on {int(np.sum(s > base))}/{len(base)} seeds, "
              f"median margin {np.nanmedian(s - base):+.1f}")
    print(f"total {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
