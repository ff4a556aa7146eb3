"""Evaluation metrics: recovery rate, spectral angle distance,
approximation error, and simplex-constrained abundance estimation.

Abundances solve, per pixel a, min ||F w - a||^2 over the probability
simplex with an accelerated projected-gradient loop (step 1/sigma_max^2,
sort-based exact projection, fixed-point KKT stop at 1e-8).
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    RankDeficientBasisError,
    ShapeMismatchError,
    SizeMismatchError,
    ZeroVectorError,
)
from .linalg import as_matrix, singular_values, spectral_norm

_KKT_TOL = 1e-8
_MAX_FISTA_ITERS = 50_000


def recovery_rate(found, truth):
    """|found ∩ truth| / k with set semantics."""
    found = np.asarray(found).ravel()
    truth = np.asarray(truth).ravel()
    if found.size != truth.size or found.size == 0:
        raise SizeMismatchError(f"index sets differ in size: {found.size} vs {truth.size}")
    return len(set(found.tolist()) & set(truth.tolist())) / truth.size


def spectral_angle_distance(f, fhat):
    """Angle in radians between two spectra (scale invariant, symmetric)."""
    f = np.asarray(f, dtype=np.float64).ravel()
    fhat = np.asarray(fhat, dtype=np.float64).ravel()
    nf = np.linalg.norm(f)
    ng = np.linalg.norm(fhat)
    if nf == 0.0 or ng == 0.0:
        raise ZeroVectorError("spectral angle needs two nonzero vectors")
    cosang = np.clip(float(f @ fhat) / (nf * ng), -1.0, 1.0)
    return float(np.arccos(cosang))


def approximation_error(A, B):
    """(absolute, relative) spectral-norm error of B against A."""
    A = as_matrix(A)
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise ShapeMismatchError(f"shapes differ: {A.shape} vs {B.shape}")
    base = spectral_norm(A)
    diff = A - B
    if not diff.any():
        return 0.0, 0.0
    absolute = spectral_norm(diff)
    return absolute, absolute / base


def project_rows_to_simplex(V):
    """Euclidean projection of every row of V onto {w >= 0, sum w = 1}."""
    V = np.asarray(V, dtype=np.float64)
    n, k = V.shape
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    j = np.arange(1, k + 1)
    cond = U * j > css
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1.0)
    return np.maximum(V - theta[:, None], 0.0)


@dataclass
class AbundanceResult:
    """Per-pixel simplex weights (columns) and residual norms."""

    W: np.ndarray
    residuals: np.ndarray
    iterations: int = 0


def estimate_abundances(F, A):
    """Simplex-constrained least-squares weights for every column of A.

    Accelerated projected gradient on all pixels at once; stops when the
    fixed-point residual ||w - proj(w - step * grad)||_inf is at most 1e-8
    for every pixel (or at the iteration cap).
    """
    F = as_matrix(F, "F")
    A = as_matrix(A)
    d, k = F.shape
    if A.shape[0] != d:
        raise ShapeMismatchError(f"F has {d} rows but A has {A.shape[0]}")
    s = singular_values(F)
    if s[-1] <= 1e-12 * s[0]:
        raise RankDeficientBasisError("basis is numerically rank deficient")
    m = A.shape[1]
    step = 1.0 / (s[0] * s[0])

    G = F.T @ F
    C = F.T @ A
    W = np.full((k, m), 1.0 / k)
    Y = W.copy()
    t_acc = 1.0
    iters = 0
    for it in range(1, _MAX_FISTA_ITERS + 1):
        iters = it
        grad = G @ Y - C
        W_new = project_rows_to_simplex((Y - step * grad).T).T
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
        Y = W_new + ((t_acc - 1.0) / t_new) * (W_new - W)
        W, t_acc = W_new, t_new
        if it % 10 == 0 or it == 1:
            grad_w = G @ W - C
            fp = project_rows_to_simplex((W - step * grad_w).T).T
            if np.abs(W - fp).max() <= _KKT_TOL:
                break
    residuals = np.linalg.norm(F @ W - A, axis=0)
    return AbundanceResult(W=W, residuals=residuals, iterations=iters)
