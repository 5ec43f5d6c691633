"""The Gaussian random field over data points shared by all methods."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..graphs import Laplacian
from ..spectral import Embedding, center, cmds_embed


class ConvergenceWarning(UserWarning):
    pass


def _dense(L) -> np.ndarray:
    if isinstance(L, Laplacian):
        L = L.matrix
    if sp.issparse(L):
        L = L.toarray()
    return np.asarray(L, dtype=float)


@dataclass
class GrfModel:
    """Fitted field with precision ``L + gamma I`` over the ``n`` points.

    The field is independent across the ``p`` features.
    """

    laplacian: np.ndarray
    gamma: float
    p: int
    log_likelihood: float
    method: str = "grf"
    converged: bool = True
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    @property
    def precision(self) -> np.ndarray:
        return self.laplacian + self.gamma * np.eye(self.n)

    @cached_property
    def covariance(self) -> np.ndarray:
        c = scipy.linalg.cho_factor(self.precision, lower=True)
        K = scipy.linalg.cho_solve(c, np.eye(self.n))
        return 0.5 * (K + K.T)


def meu_log_likelihood(Y, L, gamma: float) -> float:
    """Exact log density of ``Y`` under precision ``L + gamma I``.

    ``(p/2) log det(L + gamma I) - (np/2) log 2 pi - 1/2 tr((L + gamma I) Y Y^T)``
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, p = Y.shape
    P = _dense(L) + gamma * np.eye(n)
    try:
        c, low = scipy.linalg.cho_factor(P, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("L + gamma I is not positive definite") from exc
    logdet = 2.0 * np.log(np.diag(c)).sum()
    quad = float(np.einsum("ij,ij->", Y, P @ Y))
    return 0.5 * p * logdet - 0.5 * n * p * math.log(2 * math.pi) - 0.5 * quad


def grf_embed(model: GrfModel, q: int) -> Embedding:
    """CMDS on the centered covariance of a fitted field."""
    emb = cmds_embed(center(model.covariance), q, method=model.method)
    emb.diagnostics["log_likelihood"] = model.log_likelihood
    return emb


def _warn(msg: str):
    warnings.warn(msg, ConvergenceWarning, stacklevel=3)
