"""Locally linear embedding, its acyclic exact-likelihood variant and the
pseudolikelihood of a factorized field."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..graphs import FactorMatrix, NeighborGraph
from ..spectral import Embedding, center, cmds_embed, sym_eig
from .grf import GrfModel, _warn

DEFAULT_RIDGE = 1e-6
DEFAULT_EPS_LAST = 1e-3
RESIDUAL_FLOOR = 1e-12


@dataclass
class LleWeights:
    """Reconstruction weights per point plus the per-point precision.

    ``weights[i]`` sums to one over ``neighbors[i]``. Column ``i`` of the
    factor matrix is ``precision[i] * (e_i - sum_j w_ji e_j)``.
    """

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    weights: tuple[np.ndarray, ...]
    precision: np.ndarray

    def factor(self, lower: bool = False) -> FactorMatrix:
        M = np.zeros((self.n, self.n))
        for i, (nb, w) in enumerate(zip(self.neighbors, self.weights)):
            M[i, i] = self.precision[i]
            if nb:
                M[list(nb), i] = -self.precision[i] * w
        return FactorMatrix(M, lower)


def _as_data(Y):
    Y = np.asarray(Y, dtype=float)
    return Y[:, None] if Y.ndim == 1 else Y


def local_weights(Y, i: int, nbrs, ridge: float) -> np.ndarray:
    """Sum-to-one least squares weights reconstructing ``Y[i]`` from ``Y[nbrs]``.

    Solves ``(C + ridge * tr(C) / k * I) w = 1`` with ``C`` the local
    covariance of the neighbor offsets, then rescales ``w`` to sum to one.
    """
    nbrs = list(nbrs)
    k = len(nbrs)
    if k == 0:
        raise ValueError(f"point {i} has no neighbors")
    if k == 1:
        return np.ones(1)
    Z = Y[nbrs] - Y[i]
    C = Z @ Z.T
    tr = np.trace(C)
    reg = ridge * tr / k if tr > 0 else ridge
    A = C + reg * np.eye(k)
    try:
        if ridge == 0:
            if np.linalg.matrix_rank(A) < k:
                raise np.linalg.LinAlgError
            w = np.linalg.solve(A, np.ones(k))
        else:
            w = scipy.linalg.solve(A, np.ones(k), assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(
            f"local covariance of point {i} is singular; use a nonzero ridge") from exc
    s = w.sum()
    if s == 0 or not np.isfinite(s):
        raise np.linalg.LinAlgError(
            f"local covariance of point {i} is singular; use a nonzero ridge")
    return w / s


def lle_weights(Y, g: NeighborGraph, ridge: float = DEFAULT_RIDGE) -> LleWeights:
    """Standard LLE weights (unit precision for every point)."""
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    Y = _as_data(Y)
    if g.n != Y.shape[0]:
        raise ValueError("graph size does not match the data")
    W = tuple(local_weights(Y, i, nb, ridge) for i, nb in enumerate(g.neighbors))
    return LleWeights(g.n, g.neighbors, W, np.ones(g.n))


def lle_embed(w: LleWeights, q: int) -> Embedding:
    """Eigenvectors 2..q+1 (ascending) of ``M M^T``, unit norm columns."""
    n = w.n
    if not 1 <= q < n - 1:
        raise ValueError(f"q must lie in [1, {n - 2}], got {q}")
    M = w.factor().matrix
    L = M @ M.T
    vals, vecs = sym_eig(0.5 * (L + L.T), k=q + 1, which="smallest")
    return Embedding(vecs[:, 1:], vals[1:], "lle", spectrum="smallest",
                     diagnostics={"null_eigenvalue": float(vals[0])})


def alle_fit(Y, g: NeighborGraph, eps_last: float = DEFAULT_EPS_LAST,
             ridge: float = DEFAULT_RIDGE, per_feature: bool = True):
    """Acyclic LLE: exact maximum likelihood for a lower-triangular factor.

    Each point is regressed on its parents; the diagonal precision is the
    inverse residual variance (per feature when ``per_feature``, otherwise
    per point). The parentless last point gets precision ``eps_last``.
    Returns ``(factor, model)`` where the model's log likelihood is exact.
    """
    if g.kind != "acyclic":
        raise ValueError("ALLE needs an acyclic graph")
    if not eps_last > 0:
        raise ValueError("eps_last must be positive")
    Y = _as_data(Y)
    n, p = Y.shape
    if g.n != n:
        raise ValueError("graph size does not match the data")
    weights, prec = [], np.empty(n)
    floored = []
    for i, nb in enumerate(g.neighbors):
        if not nb:
            weights.append(np.zeros(0))
            prec[i] = eps_last
            continue
        w = local_weights(Y, i, nb, ridge)
        r = Y[i] - w @ Y[list(nb)]
        var = float(r @ r) / (p if per_feature else 1)
        if var < RESIDUAL_FLOOR:
            floored.append(i)
            var = RESIDUAL_FLOOR
        weights.append(w)
        prec[i] = 1.0 / math.sqrt(var)
    if floored:
        _warn(f"ALLE residual floored at {RESIDUAL_FLOOR:g} for {len(floored)} point(s)")
    lw = LleWeights(n, g.neighbors, tuple(weights), prec)
    M = lw.factor(lower=True)
    loglik = acyclic_log_likelihood(Y, M)
    model = GrfModel(M.matrix @ M.matrix.T, 0.0, p, loglik, method="alle",
                     info={"factor": M, "weights": lw, "floored": floored})
    return M, model


def acyclic_log_likelihood(Y, M: FactorMatrix) -> float:
    """Exact log likelihood for lower-triangular ``M``: log det is sum log m_ii^2."""
    Y = _as_data(Y)
    n, p = Y.shape
    A = M.matrix
    if np.any(np.triu(A, 1)):
        raise ValueError("factor is not lower triangular")
    diag = np.diag(A)
    if np.any(diag == 0):
        raise ValueError("zero diagonal entry in factor")
    R = A.T @ Y
    return (0.5 * p * np.log(diag ** 2).sum() - 0.5 * n * p * math.log(2 * math.pi)
            - 0.5 * float(np.sum(R * R)))


def alle_embed(M: FactorMatrix, q: int) -> Embedding:
    """CMDS on the centered covariance ``H (M M^T)^-1 H``."""
    A = M.matrix
    n = A.shape[0]
    # (M M^T)^-1 = M^-T M^-1 with triangular solves
    Minv = scipy.linalg.solve_triangular(A, np.eye(n), lower=True)
    K = Minv.T @ Minv
    return cmds_embed(center(0.5 * (K + K.T)), q, method="alle")


def pseudo_log_likelihood(Y, M: FactorMatrix) -> float:
    """Sum of per-point conditional Gaussian log densities.

    Point ``i`` has precision ``m_ii^2`` per feature and mean
    ``-sum_j (m_ji / m_ii) y_j``.
    """
    Y = _as_data(Y)
    n, p = Y.shape
    A = M.matrix
    total = 0.0
    for i in range(n):
        mii = A[i, i]
        if mii == 0:
            raise ValueError(f"point {i} has zero precision")
        col = A[:, i].copy()
        col[i] = 0.0
        resid = Y[i] + (col / mii) @ Y
        total += (0.5 * p * math.log(mii ** 2 / (2 * math.pi))
                  - 0.5 * mii ** 2 * float(resid @ resid))
    return total
