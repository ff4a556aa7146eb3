"""Dense linear-algebra backbone: spectral norm, SVD, orthonormalization
and the symmetric PSD square root.

The SVD is a self-contained one-sided Jacobi on the short side of the
matrix. It is deterministic and delivers high relative accuracy on every
singular value, which the bound diagnostics rely on (tiny sigma_{k+1}
against 1e-10 absolute slacks). Both factors come out orthonormal to
machine precision.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BadRankError, NonFiniteError, NotPsdError, NotSymmetricError

_JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 60


def as_matrix(A, name="A"):
    """Validate and return a C-contiguous float64 2-D array."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise BadRankError(f"{name} must be a nonempty 2-D matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return A


@dataclass
class SvdResult:
    """Factors A ~= U @ diag(S) @ V.T with S nonincreasing and >= 0."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def spectral_norm(A, tol=1e-10):
    """Largest singular value by power iteration on A^T A.

    Deterministic: starts from the normalized all-ones vector and stops when
    successive Rayleigh quotients differ by less than tol times the current
    value (hard cap 10 000 iterations).
    """
    A = as_matrix(A)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    m = A.shape[1]
    v = np.full(m, 1.0 / np.sqrt(m))
    lam = 0.0
    for _ in range(10000):
        w = A @ v
        lam_new = float(w @ w)
        if lam_new == 0.0:
            return 0.0
        v = w @ A
        v /= np.linalg.norm(v)
        if abs(lam_new - lam) < tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(lam))


def _jacobi_svd(A):
    """Full SVD core. Returns (U, S, V) with r = min(d, m) columns."""
    d, m = A.shape
    transposed = d > m
    # explicit copies: the kernel rotates X in place and must never alias A
    X = A.T.copy() if transposed else A.copy()
    r, n = X.shape
    R = np.eye(r)
    # rows at or below 1e-15 of the total norm are numerically zero
    floor2 = (1e-15 * float(np.linalg.norm(X))) ** 2
    kernels.svd_jacobi_rows(X, R, _JACOBI_TOL, floor2, _JACOBI_MAX_SWEEPS)
    s = np.sqrt((X * X).sum(axis=1))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    left = R.T[:, order]
    rows = X[order]
    right = np.zeros((n, r))
    for i in range(r):
        if s[i] > 0.0:
            right[:, i] = rows[i] / s[i]
    # complete an orthonormal right factor for exactly-zero singular values
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        basis = right[:, s > 0.0]
        fill = 0
        for cand in range(n):
            if fill == zero.size:
                break
            e = np.zeros(n)
            e[cand] = 1.0
            for _rep in range(2):
                if basis.shape[1]:
                    e -= basis @ (basis.T @ e)
            ne = np.linalg.norm(e)
            if ne > 1e-8:
                e /= ne
                right[:, zero[fill]] = e
                basis = np.concatenate([basis, e[:, None]], axis=1)
                fill += 1
    if transposed:
        return right, s, left
    return left, s, right


def svd_full(A):
    """Full SVD with r = min(d, m) singular triples."""
    return SvdResult(*_jacobi_svd(as_matrix(A)))


def svd_truncated(A, k):
    """Top-k truncated SVD; the residual spectral norm equals sigma_{k+1}."""
    A = as_matrix(A)
    t = min(A.shape)
    if not (1 <= k <= t):
        raise BadRankError(f"k must satisfy 1 <= k <= {t}, got {k}")
    U, s, V = _jacobi_svd(A)
    return SvdResult(np.ascontiguousarray(U[:, :k]), s[:k].copy(), np.ascontiguousarray(V[:, :k]))


def singular_values(A):
    """All singular values, nonincreasing."""
    A = as_matrix(A)
    return _jacobi_svd(A)[1]


def eigh_sym(S, sym_tol=1e-10):
    """Eigendecomposition of a symmetric matrix via the Jacobi SVD.

    Signs are recovered from u_i . v_i, which is reliable whenever no two
    eigenvalues of opposite sign share a magnitude; internal callers only
    pass (near-)PSD matrices. Returns (eigenvalues, eigenvectors) ordered
    by decreasing |eigenvalue|.
    """
    S = as_matrix(S, "S")
    n = S.shape[0]
    if S.shape[1] != n:
        raise NotSymmetricError(f"matrix is {S.shape}, not square")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > sym_tol * scale:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    S = 0.5 * (S + S.T)
    U, s, V = _jacobi_svd(S)
    signs = np.sign(np.einsum("ij,ij->j", U, V))
    signs[signs == 0.0] = 1.0
    return s * signs, V


def orthonormalize(Y, rel_tol=1e-12):
    """Orthonormal basis Q of range(Y), one column per independent direction.

    Pivoted Gram-Schmidt with reorthogonalization; a direction is dropped
    when its pivot (residual norm) falls below rel_tol times the first
    pivot. Q has rank(Y) columns and QQ^T Y = Y up to roundoff.
    """
    Y = as_matrix(Y, "Y")
    d, k = Y.shape
    if d < k:
        raise BadRankError(f"Y must be tall (d >= k), got {Y.shape}")
    W = Y.T.copy()  # the kernel orthogonalizes rows in place; never alias Y
    order = np.zeros(k, np.int64)
    rank = kernels.mgs_rows(W, rel_tol, order)
    if rank == 0:
        raise BadRankError("Y has no nonzero column")
    keep = np.sort(order[:rank])
    return np.ascontiguousarray(W[keep].T)


def psd_sqrt(L, sym_tol=1e-10):
    """Unique symmetric PSD square root C with C @ C = L.

    Eigenvalues in [-1e-10 * ||L||_2, 0) are clamped to zero; anything more
    negative raises NotPsd. A reconstruction check guards the degenerate
    case of paired +/- eigenvalues slipping past the sign recovery.
    """
    L = as_matrix(L, "L")
    lam, V = eigh_sym(L, sym_tol=sym_tol)
    norm2 = float(lam[0]) if lam.size else 0.0
    floor = -1e-10 * max(norm2, 0.0)
    if lam.min(initial=0.0) < floor:
        raise NotPsdError(f"eigenvalue {lam.min():.3e} below PSD tolerance {floor:.3e}")
    lam = np.maximum(lam, 0.0)
    C = (V * np.sqrt(lam)) @ V.T
    C = 0.5 * (C + C.T)
    err = np.abs(C @ C - L).max()
    if err > 1e-8 * max(1.0, norm2):
        raise NotPsdError("square-root reconstruction failed; input is not PSD")
    return C
