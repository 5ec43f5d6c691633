"""Acceptance criteria, one test each (criterion 1 is split in two).

Every test prints a PASS/FAIL line, collected in the terminal summary.
Criteria that this implementation does not meet are strict xfails: they run
in full and still report FAIL.
"""

import time
import warnings

import numpy as np
import pytest

from conftest import random_connected_graph
from unfold.cli import main
from unfold.datasets import swiss_roll
from unfold.eval import compare_methods, procrustes_residual
from unfold.graphs import (FactorMatrix, NeighborGraph, acyclic_graph, assemble_laplacian,
                           knn_graph, laplacian_from_multipliers)
from unfold.models.drill import drill_fit
from unfold.models.grf import meu_log_likelihood
from unfold.models.isomap import graph_shortest_paths, isomap
from unfold.models.lle import (alle_embed, alle_fit, lle_embed, lle_weights,
                               pseudo_log_likelihood)
from unfold.models.meu import meu_embed, meu_fit, meu_gradient
from unfold.oracle import dense_loglik_exact, fd_gradient, floyd_warshall
from unfold.spectral import (cmds_embed, distances_to_similarities, gen_eig, pca,
                             squared_distances, sym_eig)


def complete(n):
    return NeighborGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def pca_limit_data():
    return np.random.default_rng(0).standard_normal((20, 5))


def test_c1_alle_and_lle_pca_limit(report):
    t0 = time.perf_counter()
    Y = pca_limit_data()
    ref = pca(Y, 2).X
    with warnings.catch_warnings():
        # points with more than p parents are reconstructed exactly and floored
        warnings.simplefilter("ignore")
        M, _ = alle_fit(Y, acyclic_graph(Y, 19))
    r_alle = procrustes_residual(ref, alle_embed(M, 2).X)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r_lle = procrustes_residual(ref, lle_embed(lle_weights(Y, knn_graph(Y, 19)), 2).X)
    dt = time.perf_counter() - t0
    ok = r_alle < 1e-4 and r_lle >= 10 * 1e-4 and dt < 5
    report("1 (ALLE, LLE)", ok, f"ALLE residual {r_alle:.2e} < 1e-4, LLE K=n-1 residual "
           f"{r_lle:.2e} >= 1e-3, {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="attractive MEU on the complete graph is not PCA")
def test_c1_meu_pca_limit(report):
    t0 = time.perf_counter()
    Y = pca_limit_data()
    m = meu_fit(Y, complete(20))
    r = procrustes_residual(pca(Y, 2).X, meu_embed(m, 2).X)
    dt = time.perf_counter() - t0
    ok = m.converged and r < 1e-4 and dt < 5
    report("1 (MEU)", ok, f"MEU lambda>=0 residual {r:.2e} (needs < 1e-4), {dt:.2f}s")
    assert ok


def test_c2_gradient(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 13))
        g = random_connected_graph(rng, n, int(rng.integers(0, n)))
        Y = rng.standard_normal((n, int(rng.integers(1, 5))))
        lam = rng.uniform(0.1, 2.0, len(g.edges))
        gamma = float(rng.uniform(1e-3, 1.0))

        def f(v):
            return meu_log_likelihood(Y, laplacian_from_multipliers(g, v).toarray(), gamma)

        num = fd_gradient(f, lam)
        ana = meu_gradient(Y, g, lam, gamma)
        worst = max(worst, float(np.abs(ana - num).max() / np.abs(num).max()))
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 10
    report(2, ok, f"max relative gradient error {worst:.2e} < 1e-5 over 20 instances, {dt:.2f}s")
    assert ok


def test_c3_kkt(report):
    t0 = time.perf_counter()
    t = 2 * np.pi * np.arange(10) / 10
    Y = np.c_[np.cos(t), np.sin(t), np.zeros(10)]
    Y += 0.05 * np.random.default_rng(3).standard_normal(Y.shape)
    m = meu_fit(Y, knn_graph(Y, 2))
    lam, obs, exp = m.info["multipliers"], m.info["observed"], m.info["expected"]
    active = lam > 0
    worst = float(np.abs(exp - obs)[active].max() / obs.mean())
    dt = time.perf_counter() - t0
    ok = m.converged and worst <= 1e-3 and dt < 10
    report(3, ok, f"max active |<d>-d|/mean(d) = {worst:.2e} <= 1e-3, "
           f"converged={m.converged}, {dt:.2f}s")
    assert ok


def test_c4_alle_exactness(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(10):
        n, p = int(rng.integers(3, 21)), int(rng.integers(1, 11))
        Y = rng.standard_normal((n, p))
        # at most p parents, so no regression is exact and nothing is floored
        M, _ = alle_fit(Y, acyclic_graph(Y, int(rng.integers(1, min(n - 1, p) + 1))))
        worst = max(worst, abs(pseudo_log_likelihood(Y, M) - dense_loglik_exact(Y, factor=M.matrix)))
    Y = rng.standard_normal((10, 3))
    B = rng.standard_normal((10, 10))
    B = B + B.T + 12 * np.eye(10)
    cyclic = abs(pseudo_log_likelihood(Y, FactorMatrix(B)) - dense_loglik_exact(Y, factor=B))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and cyclic > 1e-3 and dt < 5
    report(4, ok, f"acyclic max |pseudo - exact| {worst:.2e} < 1e-8, cyclic gap "
           f"{cyclic:.2e} > 1e-3, {dt:.2f}s")
    assert ok


def _match_subspaces(w, A, B):
    """Largest projector difference over clusters of equal eigenvalues."""
    worst, start = 0.0, 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[stop - 1] > 1e-6:
            a, b = A[:, start:stop], B[:, start:stop]
            worst = max(worst, float(np.abs(a @ a.T - b @ b.T).max()))
            start = stop
    return worst


def test_c5_eigenmaps_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    val_err = vec_err = 0.0
    for _ in range(10):
        n = int(rng.integers(3, 31))
        g = random_connected_graph(rng, n, int(rng.integers(0, 2 * n)))
        L = assemble_laplacian(n, g.edges, rng.uniform(0.1, 2.0, len(g.edges)))
        d = np.diag(L).copy()
        w, U = gen_eig(L, d)
        s = np.sqrt(d)
        w2, V = sym_eig(L / s[:, None] / s[None, :])
        val_err = max(val_err, float(np.abs(w - w2).max()))
        vec_err = max(vec_err, _match_subspaces(w2, s[:, None] * U, V))
    dt = time.perf_counter() - t0
    ok = val_err < 1e-8 and vec_err < 1e-8 and dt < 5
    report(5, ok, f"eigenvalue gap {val_err:.2e}, v = D^1/2 u gap {vec_err:.2e} (< 1e-8), "
           f"{dt:.2f}s")
    assert ok


def test_c6_isomap(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    exact = 0
    for _ in range(20):
        n = int(rng.integers(2, 51))
        g = random_connected_graph(rng, n, int(rng.integers(0, 3 * n)))
        lengths = rng.integers(0, 256, len(g.edges)) / 64.0
        exact += np.array_equal(graph_shortest_paths(n, g.edges, lengths),
                                floyd_warshall(n, g.edges, lengths))
    Y = rng.standard_normal((30, 4))
    X = isomap(Y, knn_graph(Y, 29), q=2).X
    P = pca(Y, 2).X
    signs = np.sign(np.sum(X * P, axis=0))
    gap = float(np.abs(X * signs - P).max() / np.abs(P).max())
    dt = time.perf_counter() - t0
    ok = exact == 20 and gap < 1e-8 and dt < 10
    report(6, ok, f"Dijkstra == Floyd-Warshall on {exact}/20 graphs, complete-graph isomap vs "
           f"PCA {gap:.2e}, {dt:.2f}s")
    assert ok


def test_c7_drill(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    Y = rng.standard_normal((10, 40))
    m = drill_fit(Y, 0.0)
    Yc = Y - Y.mean(axis=0)
    S = Yc @ Yc.T / 40
    S += m.info["floor"] * np.mean(np.diag(S)) * np.eye(10)
    analytic = np.linalg.inv(S)
    rel = float(np.linalg.norm(m.precision - analytic) / np.linalg.norm(analytic))

    n, p = 15, 500
    T = np.eye(n) + np.diag(np.full(n - 1, 0.4), 1) + np.diag(np.full(n - 1, 0.4), -1)
    C = np.linalg.cholesky(np.linalg.inv(T))
    off = ~np.eye(n, dtype=bool)
    true_edge = (T != 0) & off
    good = 0
    for seed in range(10):
        Z = C @ np.random.default_rng(seed).standard_normal((n, p))
        for rho in np.geomspace(1.0, 200.0, 12):
            est = (np.abs(drill_fit(Z, rho).precision) > 1e-8) & off
            recall = (est & true_edge).sum() / true_edge.sum()
            false = (est & ~true_edge & off).sum() / (~true_edge & off).sum()
            if recall >= 0.9 and false <= 0.1:
                good += 1
                break
    dt = time.perf_counter() - t0
    ok = rel < 1e-4 and good >= 9 and dt < 60
    report(7, ok, f"rho=0 relative error {rel:.2e} < 1e-4, support recovered on {good}/10 "
           f"seeds, {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="k=6 graphs short-circuit the n=200 roll; "
                   "see the decisions log")
def test_c8_swiss_roll_ranking(report):
    t0 = time.perf_counter()
    rivals = ("isomap", "meu", "alle", "drill")
    wins = dict.fromkeys(rivals, 0)
    for seed in range(10):
        d = swiss_roll(200, seed=seed)
        rows = {r.method: r.score for r in compare_methods(d.Y, ("le",) + rivals)}
        for m in rivals:
            if rows[m] is not None and rows["le"] is not None and rows[m] > rows["le"]:
                wins[m] += 1
    dt = time.perf_counter() - t0
    ok = all(v >= 8 for v in wins.values()) and dt < 600
    detail = ", ".join(f"{m} {v}/10" for m, v in wins.items())
    report(8, ok, f"seeds beating unit-weight eigenmaps: {detail} (need 8/10 each), {dt:.0f}s")
    assert ok


def test_c9_cmds_round_trip(report):
    t0 = time.perf_counter()
    Y = np.random.default_rng(9).uniform(-5, 5, (40, 2))
    D = squared_distances(Y)
    X = cmds_embed(distances_to_similarities(D), 2).X
    rel = float(np.abs(squared_distances(X) - D).max() / D.max())
    dt = time.perf_counter() - t0
    ok = rel < 1e-8 and dt < 1
    report(9, ok, f"distance reconstruction error {rel:.2e} < 1e-8, {dt:.3f}s")
    assert ok


def _run_all(root):
    data = root / "roll.csv"
    cmds = [["generate", "swiss_roll", "--n", "60", "--seed", "11", "--noise", "0.1",
             "--output", str(data)]]
    for m in ("meu", "lle", "alle", "le", "isomap", "drill", "kpca", "pca"):
        cmds.append(["embed", "--method", m, "--k", "8", "--seed", "11", "--ordering", "random",
                     "--rho", "0.5", "--input", str(data), "--output", str(root / f"{m}.csv"),
                     "--svg", str(root / f"{m}.svg")])
    cmds.append(["compare", "--k", "8", "--restarts", "2", "--seed", "11",
                 "--input", str(data), "--output", str(root / "compare.csv")])
    cmds.append(["score", "--input", str(data), "--embedding", str(root / "isomap.csv"),
                 "--output", str(root / "score.txt")])
    for argv in cmds:
        assert main(argv) == 0, argv
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_c10_determinism(report, tmp_path, capsys):
    t0 = time.perf_counter()
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first = _run_all(tmp_path / "a")
    out_a = capsys.readouterr().out
    second = _run_all(tmp_path / "b")
    out_b = capsys.readouterr().out
    # the data path is part of the recorded outputs only through file names
    same = sorted(first) == sorted(second) and all(first[k] == second[k] for k in first)
    dt = time.perf_counter() - t0
    ok = same and out_a == out_b and dt < 60
    report(10, ok, f"{len(first)} output files byte-identical across two runs: {same}, "
           f"stdout identical: {out_a == out_b}, {dt:.1f}s")
    assert ok
