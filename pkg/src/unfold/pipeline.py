"""One entry point per method: data in, embedding out."""

from __future__ import annotations

import numpy as np

from .graphs import acyclic_graph, knn_graph, random_ordering
from .models.drill import DEFAULT_FLOOR, drill_embed, drill_fit
from .models.eigenmaps import laplacian_eigenmaps
from .models.isomap import isomap
from .models.lle import DEFAULT_EPS_LAST, DEFAULT_RIDGE, alle_embed, alle_fit, lle_embed, lle_weights
from .models.meu import DEFAULT_GAMMA, MeuFitConfig, meu_embed, meu_fit
from .spectral import Embedding, kernel_pca, pca

METHODS = ("meu", "lle", "alle", "le", "isomap", "drill", "kpca", "pca")


def run_method(method: str, Y, q: int = 2, k: int = 6, gamma: float = DEFAULT_GAMMA,
               rho: float = 0.0, sigma: float | None = None, ridge: float = DEFAULT_RIDGE,
               seed: int | None = 0, ordering: str = "input", eps_last: float = DEFAULT_EPS_LAST,
               strict: bool = False, normalized: bool = True,
               floor: float = DEFAULT_FLOOR) -> Embedding:
    """Embed ``Y`` with the named method.

    ``sigma`` switches Laplacian eigenmaps to heat-kernel weights and sets the
    RBF width for kernel PCA. ``ordering`` is ``"input"`` or ``"random"``
    (seeded) and only affects ALLE.
    """
    Y = np.asarray(Y, dtype=float)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    n = Y.shape[0]
    if method == "pca":
        return pca(Y, q)
    if method == "kpca":
        if sigma is None:
            return kernel_pca(Y, "linear", q)
        return kernel_pca(Y, "rbf", q, gamma=1.0 / (2.0 * sigma ** 2))
    k = min(k, n - 1)
    if method == "alle":
        if ordering == "random":
            order = random_ordering(n, seed)
        elif ordering == "input":
            order = np.arange(n)
        else:
            raise ValueError(f"unknown ordering {ordering!r}")
        M, _ = alle_fit(Y[order], acyclic_graph(Y[order], k), eps_last=eps_last, ridge=ridge)
        emb = alle_embed(M, q)
        # back to input row order
        X = np.empty_like(emb.X)
        X[order] = emb.X
        emb.X = X
        emb.diagnostics["ordering"] = order
        return emb
    g = knn_graph(Y, k)
    if method == "meu":
        return meu_embed(meu_fit(Y, g, MeuFitConfig(gamma=gamma)), q)
    if method == "lle":
        return lle_embed(lle_weights(Y, g, ridge), q)
    if method == "le":
        return laplacian_eigenmaps(Y, g, q, weighted=sigma is not None, sigma=sigma,
                                   normalized=normalized)
    if method == "isomap":
        emb = isomap(Y, g, q, strict=strict)
        if emb.n != n:
            raise ValueError("isomap dropped points from a disconnected graph; "
                             "increase k or pass strict to fail early")
        return emb
    if method == "drill":
        return drill_embed(drill_fit(Y, rho, pattern=g, floor=floor), q)
    raise AssertionError(method)
