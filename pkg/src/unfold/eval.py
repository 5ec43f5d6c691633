"""Embedding quality scores.

The main score is the Gaussian-process marginal likelihood of the data given
candidate latent coordinates (features independent, one shared kernel),
maximized over kernel hyperparameters. Higher is better.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.spatial import procrustes

from .spectral import squared_distances

# log-space bounds; the length scale is relative to the RMS latent distance
_BOUNDS = {
    "variance": (1e-4, 1e2),
    "lengthscale": (1e-2, 1e2),
    "bias": (1e-6, 1e2),
    "noise": (1e-6, 1e1),
}


@dataclass
class GplvmScoreConfig:
    """Kernel ``variance * exp(-r^2 / (2 l^2)) + bias + noise * I``.

    Hyperparameters are fitted in log space with bounded L-BFGS-B from one
    fixed start plus ``restarts - 1`` random ones drawn with ``seed``.
    """

    restarts: int = 5
    seed: int = 0
    noise_floor: float = 1e-6
    standardize: bool = True
    max_iter: int = 200

    def __post_init__(self):
        if self.noise_floor <= 0:
            raise ValueError("noise floor must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")


@dataclass
class GplvmResult:
    score: float
    hyperparameters: dict
    degenerate: bool = False
    per_restart: list = field(default_factory=list)


def standardize(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    Yc = Y - Y.mean(axis=0)
    sd = Yc.std(axis=0)
    sd[sd == 0] = 1.0
    return Yc / sd


class _Marginal:
    def __init__(self, X, Y, floor):
        self.Y = Y
        self.n, self.p = Y.shape
        self.YYt = Y @ Y.T
        self.D = squared_distances(X) if X is not None else None
        self.floor = floor

    def kernel(self, var, ls, bias, noise):
        K = np.full((self.n, self.n), bias)
        if self.D is not None:
            K += var * np.exp(-0.5 * self.D / ls ** 2)
        K[np.diag_indices(self.n)] += noise + self.floor
        return K

    def __call__(self, theta):
        """Negative log marginal likelihood and its gradient in log space."""
        if self.D is not None:
            var, ls, bias, noise = np.exp(theta)
        else:
            var, ls = 0.0, 1.0
            bias, noise = np.exp(theta)
        K = self.kernel(var, ls, bias, noise)
        try:
            c = scipy.linalg.cho_factor(K, lower=True)
        except np.linalg.LinAlgError:
            return 1e300, np.zeros_like(theta)
        logdet = 2.0 * np.log(np.diag(c[0])).sum()
        Kinv = scipy.linalg.cho_solve(c, np.eye(self.n))
        alpha = Kinv @ self.Y
        ll = (-0.5 * self.p * logdet - 0.5 * float(np.sum(self.Y * alpha))
              - 0.5 * self.n * self.p * math.log(2 * math.pi))
        # d ll / d K = 1/2 (alpha alpha^T - p K^-1)
        G = 0.5 * (alpha @ alpha.T - self.p * Kinv)
        grads = []
        if self.D is not None:
            E = np.exp(-0.5 * self.D / ls ** 2)
            grads.append(np.sum(G * var * E))
            grads.append(np.sum(G * var * E * self.D / ls ** 2))
        grads.append(bias * G.sum())
        grads.append(noise * np.trace(G))
        return -ll, -np.array(grads)


def gplvm_fit(Y, X, cfg: GplvmScoreConfig | None = None) -> GplvmResult:
    """Maximize the GP marginal likelihood of ``Y`` given inputs ``X``."""
    cfg = cfg or GplvmScoreConfig()
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != Y.shape[0]:
        raise ValueError("embedding and data must have the same number of rows")
    if cfg.standardize:
        Y = standardize(Y)
    Dx = squared_distances(X)
    scale = math.sqrt(Dx.mean()) if Dx.size else 0.0
    degenerate = not scale > 0
    obj = _Marginal(None if degenerate else X, Y, cfg.noise_floor)

    names = ["bias", "noise"] if degenerate else ["variance", "lengthscale", "bias", "noise"]
    lo = np.log([_BOUNDS[k][0] * (scale if k == "lengthscale" else 1.0) for k in names])
    hi = np.log([_BOUNDS[k][1] * (scale if k == "lengthscale" else 1.0) for k in names])
    default = {"variance": 1.0, "lengthscale": 0.3 * scale, "bias": 0.1, "noise": 0.1}
    starts = [np.log([default[k] for k in names])]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.restarts - 1):
        starts.append(rng.uniform(lo, hi))

    best, results = None, []
    for x0 in starts:
        res = scipy.optimize.minimize(obj, x0, jac=True, method="L-BFGS-B",
                                      bounds=list(zip(lo, hi)),
                                      options={"maxiter": cfg.max_iter})
        results.append(-float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
    hyp = dict(zip(names, np.exp(best.x).tolist()))
    if degenerate:
        warnings.warn("degenerate embedding (no spread); scored with bias and noise only",
                      stacklevel=2)
    return GplvmResult(-float(best.fun), hyp, degenerate, results)


def gplvm_score(Y, X, cfg: GplvmScoreConfig | None = None) -> float:
    return gplvm_fit(Y, X, cfg).score


def procrustes_residual(reference, X) -> float:
    """Procrustes disparity after centering, unit scaling and best rotation."""
    reference = np.asarray(reference, dtype=float)
    X = np.asarray(X, dtype=float)
    return float(procrustes(reference, X)[2])


@dataclass
class MethodScore:
    method: str
    score: float | None
    runtime: float
    error: str | None = None


def compare_methods(Y, methods, q: int = 2, params: dict | None = None,
                    cfg: GplvmScoreConfig | None = None) -> list[MethodScore]:
    """Run and score each method; failures are recorded, not raised.

    Rows are sorted by descending score with failed methods last.
    """
    from .pipeline import run_method

    rows = []
    for name in methods:
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                emb = run_method(name, Y, q=q, **(params or {}))
                score = gplvm_score(Y, emb.X, cfg)
            rows.append(MethodScore(name, score, time.perf_counter() - t0))
        except Exception as exc:  # noqa: BLE001 - any method failure becomes a table row
            msg = f"{type(exc).__name__}: {exc}".splitlines()[0]
            rows.append(MethodScore(name, None, time.perf_counter() - t0, msg))
    ok = sorted((r for r in rows if r.score is not None), key=lambda r: -r.score)
    return ok + [r for r in rows if r.score is None]
