"""Neighborhood graphs and the matrices assembled from them.

Undirected graphs carry the edge multipliers of the Gaussian random field;
acyclic graphs (parents strictly later in the ordering) carry the
lower-triangular factor used by acyclic LLE.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

# Above this size assembled matrices are returned as CSR.
SPARSE_THRESHOLD = 512


@dataclass(frozen=True)
class NeighborGraph:
    """Per-point neighbor lists.

    ``kind`` is ``"undirected"`` (symmetric relation, no self loops) or
    ``"acyclic"`` (every neighbor index exceeds its owner).
    """

    n: int
    kind: str
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.kind not in ("undirected", "acyclic"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if len(self.neighbors) != self.n:
            raise ValueError("need one neighbor list per point")
        for i, nbrs in enumerate(self.neighbors):
            for j in nbrs:
                if not 0 <= j < self.n:
                    raise ValueError(f"neighbor index {j} of point {i} out of range")
                if j == i:
                    raise ValueError(f"self loop at point {i}")
                if self.kind == "acyclic" and j < i:
                    raise ValueError(f"acyclic graph: parent {j} of point {i} precedes it")
        if self.kind == "undirected":
            sets = [set(nb) for nb in self.neighbors]
            for i, s in enumerate(sets):
                for j in s:
                    if i not in sets[j]:
                        raise ValueError(f"edge {i}-{j} is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges) -> "NeighborGraph":
        """Undirected graph from an iterable of ``(i, j)`` pairs."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self loop at point {i}")
            nbrs[i].add(j)
            nbrs[j].add(i)
        return cls(n, "undirected", tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def edges(self) -> np.ndarray:
        """Edge list, shape (m, 2).

        Undirected edges are listed once with ``i < j`` in lexicographic
        order. Acyclic edges are ``(child, parent)`` pairs.
        """
        if self.kind == "undirected":
            pairs = sorted({(min(i, j), max(i, j))
                            for i, nb in enumerate(self.neighbors) for j in nb})
        else:
            pairs = [(i, j) for i, nb in enumerate(self.neighbors) for j in nb]
        return np.array(pairs, dtype=np.intp).reshape(-1, 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.intp)

    def pattern(self) -> np.ndarray:
        """Boolean n x n matrix; ``pattern[j, i]`` is True for ``j`` in N(i)."""
        P = np.zeros((self.n, self.n), dtype=bool)
        for i, nb in enumerate(self.neighbors):
            P[list(nb), i] = True
        return P

    def components(self) -> np.ndarray:
        """Connected-component label for each point (edges taken as undirected)."""
        e = self.edges
        A = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])) if len(e) else
                          (np.zeros(0), (np.zeros(0, int), np.zeros(0, int))),
                          shape=(self.n, self.n))
        _, labels = connected_components(A, directed=False)
        return labels

    def is_connected(self) -> bool:
        return self.n <= 1 or np.unique(self.components()).size == 1


def _as_data(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise ValueError("data matrix must be two dimensional (points x features)")
    return Y


def _pairwise_sq(Y: np.ndarray) -> np.ndarray:
    diff = Y[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def knn_graph(Y, k: int, metric: str = "euclidean") -> NeighborGraph:
    """Symmetrized k-nearest-neighbor graph.

    Each point selects its ``k`` nearest others by squared Euclidean
    distance, ties going to the lower index; an edge is kept if either
    endpoint selected the other.
    """
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    Y = _as_data(Y)
    n = Y.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}], got {k}")
    D = _pairwise_sq(Y)
    np.fill_diagonal(D, np.inf)
    # stable sort keeps lower indices first among equal distances
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in order[i]:
            nbrs[i].add(int(j))
            nbrs[int(j)].add(i)
    return NeighborGraph(n, "undirected", tuple(tuple(sorted(s)) for s in nbrs))


def random_ordering(n: int, seed: int | None = None) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def acyclic_graph(Y, k: int, ordering: Sequence[int] | None = None) -> NeighborGraph:
    """Directed acyclic neighborhoods over relabelled points.

    Point ``i`` of the returned graph is ``Y[ordering[i]]``. Its parents are
    its ``k`` nearest points among those later in the ordering; the last
    point has none.
    """
    Y = _as_data(Y)
    n = Y.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if ordering is None:
        ordering = np.arange(n)
    ordering = np.asarray(ordering)
    if ordering.shape != (n,) or not np.array_equal(np.sort(ordering), np.arange(n)):
        raise ValueError("ordering must be a permutation of range(n)")
    Z = Y[ordering]
    D = _pairwise_sq(Z)
    nbrs = []
    for i in range(n):
        later = D[i, i + 1:]
        idx = np.argsort(later, kind="stable")[:k] + i + 1
        nbrs.append(tuple(int(j) for j in idx))
    return NeighborGraph(n, "acyclic", tuple(nbrs))


def _assemble(n: int, rows, cols, vals):
    """Symmetric matrix with the given off-diagonal entries (both triangles)."""
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    vals = np.asarray(vals, dtype=float)
    if n > SPARSE_THRESHOLD:
        A = sp.coo_matrix((np.concatenate([vals, vals]),
                           (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                          shape=(n, n)).tocsr()
        return A
    A = np.zeros((n, n))
    A[rows, cols] = vals
    A[cols, rows] = vals
    return A


def _require_undirected(g: NeighborGraph):
    if g.kind != "undirected":
        raise ValueError("operation needs an undirected graph")


def heat_adjacency(Y, g: NeighborGraph, sigma: float):
    """Heat-kernel weights ``exp(-|y_i - y_j|^2 / (2 sigma^2))`` on graph edges."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    _require_undirected(g)
    Y = _as_data(Y)
    e = g.edges
    if len(e) == 0:
        return _assemble(g.n, [], [], [])
    diff = Y[e[:, 0]] - Y[e[:, 1]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    return _assemble(g.n, e[:, 0], e[:, 1], np.exp(-d2 / (2.0 * sigma ** 2)))


def unit_adjacency(g: NeighborGraph):
    _require_undirected(g)
    e = g.edges
    return _assemble(g.n, e[:, 0], e[:, 1], np.ones(len(e)))


def degree_matrix(A):
    """Diagonal degree matrix, same storage as ``A``."""
    d = np.asarray(A.sum(axis=1)).ravel()
    if sp.issparse(A):
        return sp.diags(d, format="csr")
    return np.diag(d)


@dataclass(frozen=True)
class Laplacian:
    """Graph Laplacian with multipliers ``lambda_ij`` on its edge pattern.

    Off-diagonal entries are ``-lambda_ij`` and each diagonal entry is the sum
    of that row's multipliers, so the constant vector is in the null space.
    """

    n: int
    edges: np.ndarray
    multipliers: np.ndarray
    matrix: np.ndarray | sp.spmatrix = field(repr=False)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)


def assemble_laplacian(n: int, edges: np.ndarray, weights: np.ndarray):
    """Laplacian matrix ``sum_e w_e (e_i - e_j)(e_i - e_j)^T``."""
    edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float)
    diag = (np.bincount(edges[:, 0], weights, minlength=n)
            + np.bincount(edges[:, 1], weights, minlength=n))
    if n > SPARSE_THRESHOLD:
        L = _assemble(n, edges[:, 0], edges[:, 1], -weights)
        return (L + sp.diags(diag)).tocsr()
    L = _assemble(n, edges[:, 0], edges[:, 1], -weights)
    L[np.diag_indices(n)] = diag
    return L


def laplacian_from_multipliers(g: NeighborGraph, lambdas) -> Laplacian:
    """Assemble L from per-edge multipliers.

    ``lambdas`` is either an array aligned with ``g.edges`` or a mapping
    ``{(i, j): value}``; a mapping may list each edge in either or both
    orientations but must agree between them.
    """
    _require_undirected(g)
    e = g.edges
    if isinstance(lambdas, Mapping):
        index = {(int(i), int(j)): t for t, (i, j) in enumerate(e)}
        vals = np.full(len(e), np.nan)
        for (i, j), v in lambdas.items():
            key = (min(i, j), max(i, j))
            if key not in index:
                raise ValueError(f"multiplier given for non-edge ({i}, {j})")
            t = index[key]
            if not np.isnan(vals[t]) and vals[t] != v:
                raise ValueError(f"asymmetric multipliers on edge {key}")
            vals[t] = v
        if np.isnan(vals).any():
            missing = [tuple(e[t]) for t in np.flatnonzero(np.isnan(vals))]
            raise ValueError(f"missing multipliers for edges {missing[:5]}")
    else:
        vals = np.asarray(lambdas, dtype=float).ravel()
        if vals.shape != (len(e),):
            raise ValueError(f"expected {len(e)} multipliers, got {vals.size}")
    return Laplacian(g.n, e, vals, assemble_laplacian(g.n, e, vals))


@dataclass(frozen=True)
class FactorMatrix:
    """Square factor ``M`` with ``L = M M^T``.

    Column ``i`` holds point ``i``'s neighbor weights off the diagonal; the
    diagonal is minus the column's off-diagonal sum, so ``M^T 1 = 0``.
    ``lower`` marks the acyclic (lower-triangular) form, whose last diagonal
    entry may be raised from zero to keep ``M`` invertible.
    """

    matrix: np.ndarray
    lower: bool = False

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_columns(cls, n: int, columns: Mapping[int, tuple[Sequence[int], Sequence[float]]],
                     lower: bool = False) -> "FactorMatrix":
        """Build from ``{i: (neighbor indices, off-diagonal values)}``."""
        M = np.zeros((n, n))
        for i, (idx, vals) in columns.items():
            idx = np.asarray(idx, dtype=np.intp)
            M[idx, i] = vals
            M[i, i] = -np.sum(vals)
        return cls(M, lower)

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def laplacian_from_factor(M: FactorMatrix) -> Laplacian:
    """``L = M M^T``; the edge set is the off-diagonal support of the product."""
    A = np.asarray(M.matrix, dtype=float)
    L = A @ A.T
    L = 0.5 * (L + L.T)
    iu = np.triu_indices(L.shape[0], 1)
    nz = L[iu] != 0
    edges = np.stack([iu[0][nz], iu[1][nz]], axis=1)
    return Laplacian(L.shape[0], edges, -L[iu][nz], L)


def subgraph(g: NeighborGraph, keep: np.ndarray) -> NeighborGraph:
    """Induced subgraph on ``keep`` (sorted indices), relabelled 0..len-1."""
    keep = np.asarray(keep, dtype=np.intp)
    remap = {int(old): new for new, old in enumerate(keep)}
    nbrs = tuple(tuple(sorted(remap[j] for j in g.neighbors[old] if j in remap))
                 for old in keep)
    return NeighborGraph(len(keep), g.kind, nbrs)
