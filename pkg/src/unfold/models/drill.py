"""DRILL: L1-penalized maximum likelihood for the field's precision matrix.

The field's log likelihood ``(p/2) log det T - 1/2 tr(S T)`` with penalty
``rho * sum_{i<j} |t_ij|`` is rescaled by ``2/p`` into the usual graphical
lasso form ``log det T - tr(S/p T) - alpha * sum_{i != j} |t_ij|`` with
``alpha = rho / p``. The optimum is the same matrix ``T``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from ..graphs import NeighborGraph
from ..spectral import Embedding
from .grf import GrfModel, _warn, grf_embed

# diagonal floor, relative to the mean diagonal of S / p
DEFAULT_FLOOR = 1e-3
NEWTON_MAX_VARS = 3000


def rho_to_alpha(rho: float, p: int) -> float:
    """Per-entry graphical-lasso penalty for a field-scale penalty ``rho``."""
    return rho / p


def alpha_to_rho(alpha: float, p: int) -> float:
    return alpha * p


def _soft(x, t):
    return math.copysign(max(abs(x) - t, 0.0), x)


def _lasso_exact(V, b, alpha, x, slack=1e-12):
    """Closed-form lasso solution for the support and signs of ``x``, if optimal."""
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), b.shape)
    S = np.flatnonzero(x)
    beta = np.zeros_like(b)
    if S.size:
        sg = np.sign(x[S])
        try:
            beta[S] = np.linalg.solve(V[np.ix_(S, S)], b[S] - alpha[S] * sg)
        except np.linalg.LinAlgError:
            return None
        if np.any(np.sign(beta[S]) != sg):
            return None
    r = b - V @ beta
    off = np.ones(b.size, dtype=bool)
    off[S] = False
    if np.any(np.abs(r[off]) > alpha[off] * (1 + slack) + slack):
        return None
    return beta


def _lasso_cd(V, b, alpha, beta, max_iter, tol, check_every=10):
    """Minimize ``1/2 beta'V beta - b'beta + sum_c alpha_c |beta_c|``.

    ``alpha`` is a scalar or one penalty per coordinate. Coordinate descent,
    with a periodic attempt to finish exactly by solving on the current
    support and sign pattern and checking optimality.
    """
    k = b.size
    if k == 0:
        return beta
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), b.shape)
    if not alpha.any():
        return np.linalg.solve(V, b)
    small = k <= 64
    # plain lists are much faster than numpy for short rows
    Vl = V.tolist() if small else V
    bl = b.tolist()
    al = alpha.tolist()
    diag = np.diag(V).tolist()
    x = beta.tolist()
    Vx = (V @ beta).tolist() if small else V @ beta
    for it in range(1, max_iter + 1):
        biggest = 0.0
        for c in range(k):
            old = x[c]
            vcc = diag[c]
            new = _soft(bl[c] - Vx[c] + vcc * old, al[c]) / vcc
            if new != old:
                delta = new - old
                if small:
                    row = Vl[c]
                    for r in range(k):
                        Vx[r] += delta * row[r]
                else:
                    Vx += delta * Vl[c]
                x[c] = new
                if abs(delta) > biggest:
                    biggest = abs(delta)
        if biggest < tol:
            break
        if it % check_every == 0:
            exact = _lasso_exact(V, b, alpha, np.array(x))
            if exact is not None:
                return exact
    exact = _lasso_exact(V, b, alpha, np.array(x))
    return exact if exact is not None else np.array(x)


def _lasso_active_set(V, b, alpha, x, max_steps=None):
    """Same problem as :func:`_lasso_cd`, solved exactly by feature-sign search.

    Each step solves the linear system on the current support and signs,
    then moves to the best point on the segment towards that solution among
    the places where a coefficient changes sign. The objective falls at
    every accepted step, so the search is finite whatever the conditioning
    of ``V``. All optimality violators enter the support together; if that
    gains nothing, only the worst one does. Unpenalized coordinates stay in
    the support.
    """
    k = b.size
    if k == 0:
        return x
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), b.shape)
    free = alpha == 0
    x = np.array(x, dtype=float)
    slack = 1e-12 * max(1.0, float(np.abs(b).max()))

    def value(z):
        return 0.5 * float(z @ V @ z) - float(b @ z) + float(alpha @ np.abs(z))

    def violators(z):
        g = V @ z - b
        excess = np.abs(g) - alpha * (1 + 1e-12) - slack
        return np.flatnonzero((z == 0) & ~free & (excess > 0)), g, excess

    f = value(x)
    theta = np.where(free, 0.0, np.sign(x))
    active = (x != 0) | free
    entering = np.zeros(0, dtype=np.intp)
    for _ in range(max_steps or 20 * k + 100):
        A = np.flatnonzero(active)
        try:
            target = scipy.linalg.solve(V[np.ix_(A, A)], b[A] - alpha[A] * theta[A],
                                        assume_a="pos")
        except np.linalg.LinAlgError:
            break
        start = x[A]
        step = target - start
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = -start / step
        pen = ~free[A] & (start != 0) & (np.sign(target) != np.sign(start))
        best, best_f, best_t = None, f, 1.0
        for t in [1.0] + sorted(t for t in cross[pen] if 0 < t < 1):
            z = x.copy()
            z[A] = start + t * step
            if t < 1:
                z[A[pen & (cross <= t)]] = 0.0
            fz = value(z)
            if fz < best_f:
                best, best_f, best_t = z, fz, t
        if best is None and entering.size > 1:
            # the joint entry did not help: retry with the worst violator alone
            _, g, excess = violators(x)
            i = entering[np.argmax(excess[entering])]
            active = (x != 0) | free
            active[i] = True
            theta = np.where(free, 0.0, np.sign(x))
            theta[i] = -np.sign(g[i])
            entering = np.array([i])
            continue
        if best is None and entering.size == 1:
            break
        used = theta
        if best is not None:
            x, f = best, best_f
        theta = np.where(free, 0.0, np.sign(x))
        active = (x != 0) | free
        entering = np.zeros(0, dtype=np.intp)
        if best_t < 1.0:
            continue
        if best is not None and np.any(theta[A] != used[A]):
            # an entering coordinate settled on the other side: re-solve
            continue
        entering, g, _ = violators(x)
        if not entering.size:
            break
        active[entering] = True
        theta[entering] = -np.sign(g[entering])
    return x


def _precision_from(W, betas, actives):
    n = W.shape[0]
    T = np.zeros((n, n))
    for j in range(n):
        A, beta = actives[j], betas[j]
        t22 = 1.0 / (W[j, j] - W[j, A] @ beta)
        T[j, j] = t22
        T[A, j] = -beta * t22
    return 0.5 * (T + T.T)


def _objective(S, T, alpha):
    sign, logdet = np.linalg.slogdet(T)
    if sign <= 0:
        return np.inf
    off = np.abs(T).sum() - np.abs(np.diag(T)).sum()
    return -logdet + float(np.sum(S * T)) + alpha * off


def duality_gap(S, T, alpha) -> float:
    off = np.abs(T).sum() - np.abs(np.diag(T)).sum()
    return float(np.sum(S * T)) - S.shape[0] + alpha * off


def _allowed_mask(n, pattern):
    if pattern is None:
        allowed = ~np.eye(n, dtype=bool)
    else:
        pattern = np.asarray(pattern, dtype=bool)
        if pattern.shape != (n, n):
            raise ValueError("pattern must be an n x n boolean matrix")
        allowed = pattern | pattern.T
        np.fill_diagonal(allowed, False)
    return allowed


def _gap_at_inverse(S, W, T, alpha):
    # same as duality_gap when W = T^-1, with tr(W T) = n taken exactly
    off = np.abs(T).sum() - np.abs(np.diag(T)).sum()
    return float(np.sum((S - W) * T)) + alpha * off


def graphical_lasso(S, alpha: float, pattern: np.ndarray | None = None,
                    max_iter: int = 1000, tol: float = 1e-6, solver: str = "auto",
                    inner_max_iter: int = 1000, inner_tol: float = 1e-12):
    """Minimize ``-log det T + tr(S T) + alpha * sum_{i != j} |t_ij|``.

    Off-diagonal entries outside the boolean ``pattern`` are held at zero.

    ``solver="bcd"`` is block coordinate ascent on the covariance (Friedman et
    al.): one lasso regression per row per sweep. ``solver="newton"`` is a
    proximal Newton method over the free entries of ``T`` with the exact
    Hessian, which copes far better with badly conditioned ``S``; its memory
    grows with the square of the number of free entries, so ``"auto"`` uses
    it only up to ``NEWTON_MAX_VARS`` of them.

    Block ascent stops once the mean change of ``W`` over a sweep falls
    below ``tol`` times the mean off-diagonal magnitude of ``S``. Newton
    stops when the duality gap ``tr(S T) - n + alpha * |T|_off`` and the
    predicted decrease of its step are both below ``tol``, and counts as
    converged if the line search can make no further progress once the
    latter holds. ``info["duality_gap"]`` is evaluated at ``W = T^-1`` for
    both. Returns ``(precision, covariance, info)``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if alpha < 0:
        raise ValueError("penalty must be nonnegative")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise ValueError("second-moment matrix plus floor is not positive definite") from exc
    allowed = _allowed_mask(n, pattern)
    if solver == "auto":
        m = n + int(np.triu(allowed).sum())
        solver = "newton" if m <= NEWTON_MAX_VARS else "bcd"
    if solver == "newton":
        T, W, info = _newton(S, alpha, allowed, max_iter, tol, inner_max_iter, inner_tol)
    elif solver == "bcd":
        T, W, info = _bcd(S, alpha, allowed, max_iter, tol, inner_max_iter, inner_tol)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    info["solver"] = solver
    return T, W, info


def _bcd(S, alpha, allowed, max_iter, tol, inner_max_iter, inner_tol):
    n = S.shape[0]
    actives = [np.flatnonzero(allowed[j]) for j in range(n)]
    betas = [np.zeros(a.size) for a in actives]
    W = S.copy()
    history = []
    converged = False
    sweep = 0
    off = ~np.eye(n, dtype=bool)
    scale = float(np.abs(S[off]).mean()) if n > 1 else 1.0
    scale = scale if scale > 0 else 1.0
    for sweep in range(1, max_iter + 1):
        previous = W.copy()
        for j in range(n):
            A = actives[j]
            beta = _lasso_cd(W[np.ix_(A, A)], S[A, j], alpha, betas[j],
                             inner_max_iter, inner_tol)
            betas[j] = beta
            w12 = W[:, A] @ beta
            w12[j] = W[j, j]
            W[:, j] = w12
            W[j, :] = w12
        T = _precision_from(W, betas, actives)
        history.append(_objective(S, T, alpha))
        if np.abs(W - previous).mean() <= tol * scale:
            converged = True
            break
    try:
        gap = _gap_at_inverse(S, np.linalg.inv(T), T, alpha)
    except np.linalg.LinAlgError:
        gap = np.inf
    info = {"sweeps": sweep, "duality_gap": gap, "objective": history,
            "converged": converged}
    return T, W, info


def _newton(S, alpha, allowed, max_iter, tol, inner_max_iter, inner_tol,
            armijo=1e-4, max_backtracks=60):
    n = S.shape[0]
    ia, ib = np.nonzero(np.triu(allowed))
    a = np.concatenate([np.arange(n), ia])
    b = np.concatenate([np.arange(n), ib])
    # T = sum_e x_e (e_a e_b' + e_b e_a') c_e with c_e = 1/2 on the diagonal
    c = np.where(a == b, 0.5, 1.0)
    pen = np.where(a == b, 0.0, 2.0 * alpha)

    def assemble(x):
        T = np.zeros((n, n))
        T[a, b] = x
        T[b, a] = x
        return T

    def value(x):
        T = assemble(x)
        try:
            L = np.linalg.cholesky(T)
        except np.linalg.LinAlgError:
            return np.inf, None
        f = -2.0 * np.log(np.diag(L)).sum() + float(np.sum(S * T)) + float(pen @ np.abs(x))
        return f, L

    x = np.where(a == b, 1.0 / np.diag(S)[a], 0.0)
    f, chol = value(x)
    history = [f]
    converged = False
    gap = np.inf
    decrease = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Linv = scipy.linalg.solve_triangular(chol, np.eye(n), lower=True)
        W = Linv.T @ Linv
        grad = 2.0 * c * (S - W)[a, b]
        H = 2.0 * np.outer(c, c) * (W[np.ix_(a, b)] * W[np.ix_(b, a)]
                                     + W[np.ix_(a, a)] * W[np.ix_(b, b)])
        rhs = H @ x - grad
        # a few cheap sweeps find most of the support, then solve exactly
        guess = _lasso_cd(H, rhs, pen, x.copy(), 3, inner_tol)
        target = _lasso_active_set(H, rhs, pen, guess)
        D = target - x
        decrease = float(grad @ D + pen @ (np.abs(target) - np.abs(x)))
        gap = _gap_at_inverse(S, W, assemble(x), alpha)
        if -decrease <= tol and abs(gap) <= tol:
            converged = True
            break
        step = 1.0
        for _ in range(max_backtracks):
            trial = x + step * D
            ft, ct = value(trial)
            if ft <= f + armijo * step * decrease and ft < f:
                break
            step *= 0.5
        else:
            # no decrease representable in floating point
            converged = -decrease <= tol
            break
        x, f, chol = trial, ft, ct
        history.append(f)
    T = assemble(x)
    Linv = scipy.linalg.solve_triangular(chol, np.eye(n), lower=True)
    W = Linv.T @ Linv
    gap = _gap_at_inverse(S, W, T, alpha)
    info = {"sweeps": it, "duality_gap": gap, "objective": history,
            "converged": converged, "newton_decrement": -decrease}
    return T, W, info


def drill_fit(Y, rho: float, pattern: NeighborGraph | None = None,
              floor: float = DEFAULT_FLOOR, center: bool = True,
              max_iter: int = 1000, tol: float = 1e-6, solver: str = "auto") -> GrfModel:
    """Sparse precision over data points by the graphical lasso.

    ``S = Y Y^T`` (after removing the mean point when ``center``). The
    diagonal of ``S / p`` is raised by ``floor`` times its mean so the
    problem stays well posed when there are fewer features than points;
    being relative, the floor leaves the fit unchanged (up to scale) when
    ``Y`` is rescaled. With a ``pattern`` graph, precision entries off its
    edges are fixed at zero.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, p = Y.shape
    Yc = Y - Y.mean(axis=0) if center else Y
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    S = Yc @ Yc.T / p
    level = float(np.mean(np.diag(S)))
    S[np.diag_indices(n)] += floor * (level if level > 0 else 1.0)
    mask = None
    if pattern is not None:
        if pattern.kind != "undirected" or pattern.n != n:
            raise ValueError("pattern must be an undirected graph over the data points")
        mask = pattern.pattern()
    alpha = rho_to_alpha(rho, p)
    T, W, info = graphical_lasso(S, alpha, mask, max_iter=max_iter, tol=tol, solver=solver)
    if not info["converged"]:
        _warn(f"graphical lasso stopped after {info['sweeps']} sweeps with "
              f"duality gap {info['duality_gap']:.3g}")
    sign, logdet = np.linalg.slogdet(T)
    Ycs = Yc @ Yc.T
    loglik = (0.5 * p * logdet - 0.5 * n * p * math.log(2 * math.pi)
              - 0.5 * float(np.sum(Ycs * T)))
    info.update(alpha=alpha, rho=rho, floor=floor)
    return GrfModel(T, 0.0, p, loglik, method="drill", converged=info["converged"], info=info)


def drill_embed(model: GrfModel, q: int) -> Embedding:
    return grf_embed(model, q)
