"""Brute-force reference computations for the test suite.

Nothing here is used by the fitting code; each routine is a deliberately
naive, independent route to a quantity the library computes another way.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def fd_gradient(f, x, h=None) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x``.

    ``h`` defaults to ``1e-5 * (1 + |x_i|)`` per coordinate.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        steps = 1e-5 * (1.0 + np.abs(x))
    else:
        steps = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    g = np.empty_like(x)
    for t in range(x.size):
        e = np.zeros_like(x)
        e.flat[t] = steps.flat[t]
        g.flat[t] = (f(x + e) - f(x - e)) / (2.0 * steps.flat[t])
    return g


def floyd_warshall(n: int, edges, lengths) -> np.ndarray:
    """All-pairs shortest path lengths; unreachable pairs are ``inf``."""
    lengths = np.asarray(lengths, dtype=float)
    if np.any(lengths < 0):
        raise ValueError("edge lengths must be nonnegative")
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for (i, j), w in zip(edges, lengths):
        i, j, w = int(i), int(j), float(w)
        if w < dist[i][j]:
            dist[i][j] = w
            dist[j][i] = w
    for m in range(n):
        dm = dist[m]
        for i in range(n):
            dim = dist[i][m]
            if dim == math.inf:
                continue
            di = dist[i]
            for j in range(n):
                alt = dim + dm[j]
                if alt < di[j]:
                    di[j] = alt
    return np.array(dist)


def mc_expected_distance(L, gamma: float, p: int, samples: int, seed=None):
    """Monte-Carlo squared inter-point distances under the GRF.

    Draws ``samples`` data sets of ``p`` independent feature columns, each
    column ~ N(0, (L + gamma I)^-1), and averages ``|y_i - y_j|^2``.
    Returns ``(mean, standard_error)``.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    P = L + gamma * np.eye(n)
    try:
        C = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise ValueError("L + gamma I is not positive definite") from exc
    rng = np.random.default_rng(seed)
    total = np.zeros((n, n))
    total_sq = np.zeros((n, n))
    batch = 4096
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        Z = rng.standard_normal((n, p * b))
        # columns ~ N(0, P^-1): solve C^T y = z
        Yc = np.linalg.solve(C.T, Z).reshape(n, b, p)
        diff = Yc[:, None, :, :] - Yc[None, :, :, :]
        d = (diff ** 2).sum(axis=3)
        total += d.sum(axis=2)
        total_sq += (d ** 2).sum(axis=2)
        done += b
    mean = total / samples
    var = np.maximum(total_sq / samples - mean ** 2, 0.0)
    return mean, np.sqrt(var / samples)


def dense_loglik(Y, precision) -> float:
    """Sum over feature columns of the zero-mean Gaussian log density."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    P = np.asarray(precision, dtype=float)
    n, p = Y.shape
    sign, logdet = np.linalg.slogdet(P)
    if sign <= 0:
        raise ValueError("precision is not positive definite")
    total = 0.0
    for c in range(p):
        y = Y[:, c]
        total += 0.5 * logdet - 0.5 * n * math.log(2 * math.pi) - 0.5 * float(y @ P @ y)
    return total


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def dense_loglik_exact(Y, precision=None, factor=None) -> float:
    """:func:`dense_loglik` in exact rational arithmetic, rounded once at the end.

    Every float is an exact rational, so the determinant (by fraction-valued
    elimination) and the quadratic forms carry no rounding error however
    badly conditioned the precision is. Passing ``factor`` instead of
    ``precision`` uses ``factor @ factor.T`` formed exactly, which avoids
    the rounding of a floating-point product. Cubic in ``n`` with growing
    integers: meant for small reference problems.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, p = Y.shape
    if (precision is None) == (factor is None):
        raise ValueError("pass exactly one of precision and factor")
    if factor is not None:
        F = [[Fraction(v) for v in row] for row in np.asarray(factor, dtype=float)]
        P = [[sum(a * b for a, b in zip(F[i], F[j])) for j in range(n)] for i in range(n)]
    else:
        P = [[Fraction(v) for v in row] for row in np.asarray(precision, dtype=float)]
    quad = Fraction(0)
    for c in range(p):
        y = [Fraction(v) for v in Y[:, c]]
        quad += sum(y[i] * P[i][j] * y[j] for i in range(n) for j in range(n))
    A = [row[:] for row in P]
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r][k] != 0), None)
        if piv is None:
            raise ValueError("precision is singular")
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for r in range(k + 1, n):
            f = A[r][k] / A[k][k]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[k])]
    if det <= 0:
        raise ValueError("precision is not positive definite")
    return 0.5 * p * _log_fraction(det) - 0.5 * n * p * math.log(2 * math.pi) - 0.5 * float(quad)


def brute_knn(Y, k: int) -> set[tuple[int, int]]:
    """Union-symmetrized k-NN edge set from a full distance sort."""
    Y = np.asarray(Y, dtype=float)
    n = len(Y)
    edges = set()
    for i in range(n):
        d = [(float(np.sum((Y[i] - Y[j]) ** 2)), j) for j in range(n) if j != i]
        d.sort()
        for _, j in d[:k]:
            edges.add((min(i, j), max(i, j)))
    return edges
