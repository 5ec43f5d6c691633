"""Laplacian eigenmaps."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..graphs import NeighborGraph, degree_matrix, heat_adjacency, unit_adjacency
from ..spectral import Embedding, gen_eig, sym_eig


def graph_laplacian(Y, g: NeighborGraph, weighted: bool = False, sigma: float | None = None):
    """``(L, degrees)`` with ``L = D - A`` for unit or heat-kernel weights."""
    if weighted:
        if sigma is None:
            raise ValueError("sigma is required for heat-kernel weights")
        A = heat_adjacency(Y, g, sigma)
    else:
        A = unit_adjacency(g)
    D = degree_matrix(A)
    L = D - A
    d = np.asarray(D.diagonal() if sp.issparse(D) else np.diag(D))
    return L, d


def laplacian_eigenmaps(Y, g: NeighborGraph, q: int = 2, weighted: bool = False,
                        sigma: float | None = None, normalized: bool = True) -> Embedding:
    """Embed with the eigenvectors after the constant one.

    ``normalized`` solves ``L u = lam D u`` (degree-scaled constraint);
    otherwise the plain problem ``L u = lam u`` is used.
    """
    n = g.n
    if not 1 <= q < n - 1:
        raise ValueError(f"q must lie in [1, {n - 2}], got {q}")
    labels = g.components()
    if np.unique(labels).size > 1:
        sizes = np.bincount(labels)
        raise ValueError(f"neighborhood graph has {sizes.size} components "
                         f"(sizes {sorted(sizes.tolist(), reverse=True)[:5]})")
    L, d = graph_laplacian(Y, g, weighted, sigma)
    if normalized:
        vals, vecs = gen_eig(L, d, k=q + 1)
    else:
        vals, vecs = sym_eig(L, k=q + 1, which="smallest")
    method = "le" if normalized else "le-unnormalized"
    return Embedding(vecs[:, 1:], vals[1:], method, spectrum="smallest",
                     diagnostics={"null_eigenvalue": float(vals[0]),
                                  "weighted": weighted})
