"""Isomap: CMDS on squared graph geodesics."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from ..graphs import NeighborGraph, subgraph
from ..spectral import Embedding, cmds_embed, distances_to_similarities


def geodesic_distances(Y, g: NeighborGraph) -> np.ndarray:
    """Shortest path lengths through the graph with Euclidean edge lengths."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    e = g.edges
    diff = Y[e[:, 0]] - Y[e[:, 1]]
    length = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return graph_shortest_paths(g.n, e, length)


def graph_shortest_paths(n: int, edges, lengths) -> np.ndarray:
    """Dijkstra from every source; unreachable pairs are ``inf``."""
    edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    lengths = np.asarray(lengths, dtype=float)
    if np.any(lengths < 0):
        raise ValueError("edge lengths must be nonnegative")
    # explicit zeros stay stored, so coincident neighbours remain connected
    A = sp.csr_matrix((lengths, (edges[:, 0], edges[:, 1])), shape=(n, n))
    return dijkstra(A, directed=False)


def isomap(Y, g: NeighborGraph, q: int = 2, strict: bool = False) -> Embedding:
    """Isomap embedding.

    A disconnected graph is restricted to its largest component (with a
    warning) unless ``strict``; the kept point indices are returned in
    ``diagnostics["index"]``.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    labels = g.components()
    index = np.arange(g.n)
    if np.unique(labels).size > 1:
        if strict:
            raise ValueError(f"neighborhood graph has {np.unique(labels).size} components")
        big = np.argmax(np.bincount(labels))
        index = np.flatnonzero(labels == big)
        warnings.warn(f"isomap: graph disconnected, embedding largest component "
                      f"({index.size} of {g.n} points)", stacklevel=2)
        g = subgraph(g, index)
        Y = Y[index]
    G = geodesic_distances(Y, g)
    B = distances_to_similarities(G ** 2)
    emb = cmds_embed(B, q, method="isomap")
    emb.diagnostics["index"] = index
    return emb
