"""Distance and similarity algebra, eigensolvers and the CMDS embedding step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

# Dense eigensolver up to this size, ARPACK beyond it.
DENSE_EIG_LIMIT = 2048


@dataclass
class Embedding:
    """Latent coordinates produced by one of the methods.

    ``spectrum`` says which end of the spectrum was kept: ``"largest"`` for
    CMDS-style methods (eigenvalues descending) and ``"smallest"`` for
    Laplacian-style ones (eigenvalues ascending, constant vector dropped).
    """

    X: np.ndarray
    eigenvalues: np.ndarray
    method: str
    spectrum: str = "largest"
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]


def _sym(A, name="matrix", rtol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square")
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    if np.abs(A - A.T).max(initial=0.0) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def fix_signs(V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip columns so each one's first clearly nonzero entry is positive."""
    V = np.array(V, dtype=float, copy=True)
    for c in range(V.shape[1]):
        col = V[:, c]
        big = np.flatnonzero(np.abs(col) > tol * max(np.abs(col).max(initial=0.0), 1e-300))
        if big.size and col[big[0]] < 0:
            V[:, c] = -col
    return V


def squared_distances(Y) -> np.ndarray:
    """All pairwise squared Euclidean distances between rows of ``Y``."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    G = Y @ Y.T
    g = np.diag(G)
    D = g[:, None] - 2.0 * G + g[None, :]
    D = 0.5 * (D + D.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def center(K) -> np.ndarray:
    """Double centering ``H K H`` with ``H = I - 11^T / n``."""
    K = np.asarray(K, dtype=float)
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    return K - row - col + K.mean()


def distances_to_similarities(D) -> np.ndarray:
    """Centered similarity ``B = -1/2 H D H`` from squared distances."""
    B = -0.5 * center(D)
    return 0.5 * (B + B.T)


def sym_eig(A, k: int | None = None, which: str = "smallest"):
    """Eigenpairs of a symmetric matrix, eigenvalues ascending.

    With ``k`` given only ``k`` pairs from the requested end are returned
    (still ascending). Eigenvectors are orthonormal with deterministic signs.
    """
    if sp.issparse(A):
        n = A.shape[0]
        if n <= DENSE_EIG_LIMIT:
            A = A.toarray()
    else:
        n = np.asarray(A).shape[0]
    if not sp.issparse(A):
        A = _sym(A)
        if k is None or k >= n:
            w, V = scipy.linalg.eigh(A)
        elif which == "smallest":
            w, V = scipy.linalg.eigh(A, subset_by_index=[0, k - 1])
        else:
            w, V = scipy.linalg.eigh(A, subset_by_index=[n - k, n - 1])
    else:
        if k is None:
            raise ValueError("k is required for large sparse inputs")
        w, V = scipy.sparse.linalg.eigsh(A, k=k, which="SA" if which == "smallest" else "LA")
        order = np.argsort(w)
        w, V = w[order], V[:, order]
    return w, fix_signs(V)


def gen_eig(L, D, k: int | None = None):
    """Generalized problem ``L u = lam D u`` for positive diagonal ``D``.

    ``D`` may be a matrix or the vector of its diagonal. Returns ascending
    eigenvalues and ``D``-orthonormal eigenvectors.
    """
    d = np.asarray(D.diagonal() if sp.issparse(D) else D, dtype=float)
    if d.ndim == 2:
        if np.count_nonzero(d - np.diag(np.diag(d))):
            raise ValueError("D must be diagonal")
        d = np.diag(d)
    if np.any(d <= 0):
        raise ValueError("D must have positive diagonal entries")
    if sp.issparse(L):
        L = L.toarray()
    L = _sym(L, "L")
    s = 1.0 / np.sqrt(d)
    w, V = sym_eig(s[:, None] * L * s[None, :], k=k, which="smallest")
    return w, fix_signs(s[:, None] * V)


def cmds_embed(B, q: int, method: str = "cmds") -> Embedding:
    """Classical MDS: top-``q`` eigenvectors of ``B`` scaled by root eigenvalues.

    Negative eigenvalues are clamped to zero for scaling; the mass of
    the negative part of the spectrum is recorded in the diagnostics.
    """
    B = _sym(B, "B", rtol=1e-8)
    n = B.shape[0]
    if not 1 <= q <= n - 1:
        raise ValueError(f"q must lie in [1, {n - 1}], got {q}")
    if n <= DENSE_EIG_LIMIT:
        w_all = scipy.linalg.eigh(B, eigvals_only=True)
        w, V = sym_eig(B, k=q, which="largest")
    else:
        w_all = None
        w, V = sym_eig(sp.csr_matrix(B), k=q, which="largest")
    w, V = w[::-1], V[:, ::-1]
    if not np.all(np.isfinite(w)):
        raise np.linalg.LinAlgError("eigensolver returned non-finite eigenvalues")
    X = V * np.sqrt(np.maximum(w, 0.0))
    diag = {"retained_mass": float(np.maximum(w, 0).sum())}
    if w_all is not None:
        pos = w_all[w_all > 0].sum()
        diag["discarded_mass"] = float(pos - np.maximum(w, 0).sum())
        diag["negative_mass"] = float(-w_all[w_all < 0].sum())
    return Embedding(fix_signs(X), w, method, "largest", diag)


def expected_squared_distances(K, p: int) -> np.ndarray:
    """Expected squared inter-point distances under a zero-mean GRF.

    For ``p`` independent features with point covariance ``K`` this is
    ``p (k_ii - 2 k_ij + k_jj)``. The constant is checked against sampling in
    the test suite.
    """
    K = np.asarray(K, dtype=float)
    k = np.diag(K)
    E = p * (k[:, None] - 2.0 * K + k[None, :])
    E = 0.5 * (E + E.T)
    np.fill_diagonal(E, 0.0)
    return E


def kernel_matrix(Y, kernel: str = "linear", gamma: float = 1.0) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if kernel == "linear":
        return Y @ Y.T
    if kernel == "rbf":
        return np.exp(-gamma * squared_distances(Y))
    raise ValueError(f"unknown kernel {kernel!r}")


def kernel_pca(Y, kernel: str = "linear", q: int = 2, gamma: float = 1.0) -> Embedding:
    """Kernel PCA: center the kernel matrix and run CMDS on it."""
    K = kernel_matrix(Y, kernel, gamma)
    return cmds_embed(center(K), q, method=f"kpca-{kernel}")


def pca(Y, q: int = 2) -> Embedding:
    """Principal component scores via the SVD of the centered data."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if not 1 <= q <= n - 1:
        raise ValueError(f"q must lie in [1, {n - 1}], got {q}")
    Yc = Y - Y.mean(axis=0)
    U, s, _ = np.linalg.svd(Yc, full_matrices=False)
    s = np.concatenate([s, np.zeros(max(0, q - s.size))])[:q]
    U = np.hstack([U, np.zeros((n, max(0, q - U.shape[1])))])[:, :q]
    return Embedding(fix_signs(U * s), s ** 2, "pca")
