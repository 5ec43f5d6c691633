"""Maximum entropy unfolding: maximum likelihood over edge multipliers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..graphs import NeighborGraph, assemble_laplacian
from ..spectral import Embedding
from .grf import GrfModel, _warn, grf_embed, meu_log_likelihood  # noqa: F401

DEFAULT_GAMMA = 1e-4


@dataclass
class MeuFitConfig:
    """Optimizer settings for :func:`meu_fit`.

    ``tol`` bounds the KKT residual relative to the mean edge distance.
    ``constraint="nonnegative"`` keeps the network attractive, which makes
    every iterate a valid covariance; ``"none"`` allows signed multipliers and
    relies on the line search to stay positive definite.
    Newton scaling is used while the edge count is at most
    ``newton_max_edges``; larger problems fall back to diagonal scaling.
    """

    max_iters: int = 500
    tol: float = 1e-6
    lambda_init: float | None = None
    gamma: float = DEFAULT_GAMMA
    constraint: str = "nonnegative"
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    newton_max_edges: int = 4000

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters < 1:
            raise ValueError("tolerance and iteration cap must be positive")
        if self.constraint not in ("nonnegative", "none"):
            raise ValueError(f"unknown constraint mode {self.constraint!r}")
        if not self.gamma > 0:
            raise ValueError("MEU needs gamma > 0 to invert L + gamma I")
        if self.lambda_init is not None and not self.lambda_init > 0:
            raise ValueError("lambda_init must be positive")


class _Objective:
    """Log likelihood, gradient and Hessian as functions of edge multipliers."""

    def __init__(self, Y, g: NeighborGraph, gamma: float):
        self.n, self.p = Y.shape
        self.edges = g.edges
        self.gamma = gamma
        i, j = self.edges[:, 0], self.edges[:, 1]
        diff = Y[i] - Y[j]
        self.d = np.einsum("ij,ij->i", diff, diff)
        self.const = (-0.5 * self.n * self.p * math.log(2 * math.pi)
                      - 0.5 * gamma * float(np.sum(Y * Y)))

    def _factor(self, lam):
        L = assemble_laplacian(self.n, self.edges, lam)
        L[np.diag_indices(self.n)] += self.gamma
        return scipy.linalg.cho_factor(L, lower=True)

    def value(self, lam, factor=None) -> float:
        if factor is None:
            try:
                factor = self._factor(lam)
            except np.linalg.LinAlgError:
                return -np.inf
        logdet = 2.0 * np.log(np.diag(factor[0])).sum()
        return 0.5 * self.p * logdet - 0.5 * float(lam @ self.d) + self.const

    def expected(self, K) -> np.ndarray:
        i, j = self.edges[:, 0], self.edges[:, 1]
        return self.p * (K[i, i] + K[j, j] - 2.0 * K[i, j])

    def gradient(self, K) -> np.ndarray:
        return 0.5 * (self.expected(K) - self.d)

    def hessian(self, K) -> np.ndarray:
        i, j = self.edges[:, 0], self.edges[:, 1]
        # rows of K B^T for the incidence vectors b_e = e_i - e_j
        KB = K[:, i] - K[:, j]
        G = KB[i, :] - KB[j, :]
        return -0.5 * self.p * G ** 2


def _covariance(factor, n):
    K = scipy.linalg.cho_solve(factor, np.eye(n))
    return 0.5 * (K + K.T)


def meu_fit(Y, g: NeighborGraph, cfg: MeuFitConfig | None = None) -> GrfModel:
    """Fit edge multipliers by (projected) Newton ascent on the log likelihood.

    Each multiplier's gradient is half the gap between the model's expected
    squared distance and the observed one. Iteration stops once every edge
    satisfies the KKT conditions of the bound-constrained problem to within
    ``cfg.tol * mean(d)``; hitting ``max_iters`` first returns an unconverged
    model and raises a :class:`ConvergenceWarning`.
    """
    cfg = cfg or MeuFitConfig()
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = Y.shape[0]
    if n < 2:
        raise ValueError("MEU needs at least two points")
    if g.kind != "undirected" or g.n != n:
        raise ValueError("MEU needs an undirected graph over the data points")
    if not g.is_connected():
        raise ValueError("neighborhood graph is disconnected")

    obj = _Objective(Y, g, cfg.gamma)
    m = len(obj.edges)
    # with all distances zero the multipliers diverge and no tolerance is met
    scale = float(obj.d.mean())
    lam0 = cfg.lambda_init if cfg.lambda_init is not None else 1.0 / (scale if scale > 0 else 1.0)
    lam = np.full(m, lam0)
    signed = cfg.constraint == "none"
    lower = -np.inf if signed else 0.0
    use_newton = m <= cfg.newton_max_edges

    factor = obj._factor(lam)
    f = obj.value(lam, factor)
    converged = False
    stalled = False
    it = 0
    kkt = np.inf
    for it in range(1, cfg.max_iters + 1):
        K = _covariance(factor, n)
        grad = obj.gradient(K)
        proj = grad if signed else np.where(lam > 0, grad, np.maximum(grad, 0.0))
        kkt = 2.0 * np.abs(proj).max(initial=0.0)
        if kkt <= cfg.tol * scale:
            converged = True
            break

        # variables held at the bound: at (or numerically near) zero and pushed down
        eps = min(1e-2 * float(lam.max()), float(np.abs(lam - np.maximum(lam + grad, 0)).max()))
        bound = (lam <= eps) & (grad < 0) & (not signed)
        free = ~bound
        H = obj.hessian(K)
        step = np.zeros(m)
        if use_newton and free.any():
            Hf = H[np.ix_(free, free)]
            try:
                c = scipy.linalg.cho_factor(-Hf, lower=True)
                step[free] = scipy.linalg.cho_solve(c, grad[free])
            except np.linalg.LinAlgError:
                step[free] = grad[free] / np.maximum(-np.diag(Hf), 1e-300)
        else:
            step[free] = grad[free] / np.maximum(-np.diag(H)[free], 1e-300)
        step[bound] = grad[bound] / np.maximum(-np.diag(H)[bound], 1e-300)

        alpha = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            trial = np.maximum(lam + alpha * step, lower)
            try:
                tfac = obj._factor(trial)
            except np.linalg.LinAlgError:
                alpha *= cfg.backtrack
                continue
            ft = obj.value(trial, tfac)
            if ft >= f + cfg.armijo * float(grad @ (trial - lam)) and ft > -np.inf:
                accepted = True
                break
            alpha *= cfg.backtrack
        if not accepted:
            stalled = True
            break
        lam, factor, f = trial, tfac, ft

    if not converged:
        reason = "line search stalled" if stalled else "iteration limit reached"
        _warn(f"MEU fit did not converge ({reason}); KKT residual {kkt:.3g}, "
              f"tolerance {cfg.tol * scale:.3g}")
    L = assemble_laplacian(n, obj.edges, lam)
    model = GrfModel(L, cfg.gamma, Y.shape[1], f, method="meu", converged=converged,
                     info={"multipliers": lam, "edges": obj.edges, "iterations": it,
                           "kkt_residual": kkt, "observed": obj.d})
    model.info["expected"] = obj.expected(model.covariance)
    return model


def meu_embed(model: GrfModel, q: int) -> Embedding:
    """Embedding from the top eigenvectors of the centered covariance."""
    return grf_embed(model, q)


def meu_gradient(Y, g: NeighborGraph, lambdas, gamma: float) -> np.ndarray:
    """Analytic derivative of the log likelihood with respect to each multiplier."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    obj = _Objective(Y, g, gamma)
    factor = obj._factor(np.asarray(lambdas, dtype=float))
    return obj.gradient(_covariance(factor, obj.n))
