"""Rank-k approximation by subspace iteration.

Two seeding strategies share one stabilized power loop: the columns
picked by successive projection (deterministic) or a seeded Gaussian
test matrix with optional oversampling. The bound diagnostics evaluate
every quantity of the approximation-error analysis on a concrete run
using the full SVD.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BadRankError
from .linalg import as_matrix, orthonormalize, singular_values, spectral_norm, svd_full
from .rng import SplitMix64
from .spa import spa_select

_ERR_TOL = 1e-9
_RANK_B_REL = 1e-10
_SINGULAR_G1_REL = 1e-12
BOUND_MARGIN_CONSTANT = 20164.0  # = 142^2, the squared margin constant of the error bound


@dataclass
class RankKApprox:
    """Projector basis Q, approximation B = Q Q^T A, and bookkeeping."""

    Q: np.ndarray
    B: np.ndarray
    q: int
    error2: float
    seed_indices: np.ndarray | None = None
    oversample: int = 0
    seed: int | None = None
    rank_collapsed: bool = False
    timings: dict = field(default_factory=dict)


@dataclass
class BoundReport:
    """Error-bound quantities evaluated on one approximation run."""

    sigma_k: float
    sigma_k1: float
    sigma_min_AI: float
    rho: float
    g1_min: float
    g2_max: float
    error_bound: float
    margin_bound: float
    quadratic_rhs: float | None
    achieved_error: float
    rank_b: int
    q: int
    singular_z1: bool = False


def subspace_basis(A, start, q):
    """Orthonormal basis of range((A A^T)^q @ start), stabilized.

    Re-orthonormalizes after every multiplication by A or A^T (2q+1 times
    in total), which keeps the iterate representable for large q. The
    column count can shrink if the iterate loses rank.
    """
    Q = orthonormalize(start)
    for _ in range(q):
        Z = orthonormalize(A.T @ Q)
        Q = orthonormalize(A @ Z)
    return Q


def spa_rank_approx(A, k, q, err_tol=_ERR_TOL):
    """Rank-k approximation seeded by the k successively projected columns.

    B = Q Q^T A where Q spans range((A A^T)^q A(I)); error2 is the measured
    spectral norm of A - B. A rank collapse during iteration is reported via
    the flag, not raised.
    """
    A = as_matrix(A)
    if q < 0:
        raise BadRankError(f"q must be >= 0, got {q}")
    timings = {}
    t0 = time.perf_counter()
    idx = spa_select(A, k)
    t1 = time.perf_counter()
    Q = subspace_basis(A, np.ascontiguousarray(A[:, idx]), q)
    t2 = time.perf_counter()
    B = Q @ (Q.T @ A)
    t3 = time.perf_counter()
    err = spectral_norm(A - B, err_tol)
    t4 = time.perf_counter()
    timings["spa"] = t1 - t0
    timings["power"] = t2 - t1
    timings["form_b"] = t3 - t2
    timings["error_norm"] = t4 - t3
    return RankKApprox(
        Q=Q,
        B=B,
        q=q,
        error2=err,
        seed_indices=idx,
        rank_collapsed=Q.shape[1] < k,
        timings=timings,
    )


def rand_subspace_approx(A, k, q, oversample=0, seed=0, err_tol=_ERR_TOL):
    """Gaussian-seeded randomized subspace iteration.

    With oversample = p > 0 the sketch has k+p columns and B is truncated
    back to rank k through the SVD of the compressed matrix Q^T A; with
    p = 0 it reduces to B = Q Q^T A. The Gaussian test matrix comes from
    the seeded splitmix64 stream, so runs are reproducible.
    """
    A = as_matrix(A)
    d, m = A.shape
    if q < 0 or oversample < 0:
        raise BadRankError("q and oversample must be >= 0")
    ell = k + oversample
    if not (1 <= k <= min(d, m)) or ell > min(d, m):
        raise BadRankError(
            f"need 1 <= k and k + oversample <= {min(d, m)}, got k={k}, oversample={oversample}"
        )
    timings = {}
    t0 = time.perf_counter()
    omega = SplitMix64(seed).normal_matrix(m, ell)
    t1 = time.perf_counter()
    Q = subspace_basis(A, A @ omega, q)
    if Q.shape[1] > k:
        # truncate the oversampled sketch back to rank k (top-k SVD of Q^T A)
        from .linalg import svd_truncated

        pk = svd_truncated(Q.T @ A, k)
        Q = np.ascontiguousarray(Q @ pk.U)
    t2 = time.perf_counter()
    B = Q @ (Q.T @ A)
    t3 = time.perf_counter()
    err = spectral_norm(A - B, err_tol)
    t4 = time.perf_counter()
    timings["sample"] = t1 - t0
    timings["power"] = t2 - t1
    timings["form_b"] = t3 - t2
    timings["error_norm"] = t4 - t3
    return RankKApprox(
        Q=Q,
        B=B,
        q=q,
        error2=err,
        oversample=oversample,
        seed=seed,
        rank_collapsed=Q.shape[1] < k,
        timings=timings,
    )


def bound_report(A, approx):
    """Evaluate the error-bound quantities for a seeded-column run.

    Everything is computed from the full SVD of A: the singular values
    around the split, sigma_min(A(I)), the margin rho, the extreme singular
    values of the blocks of G = U^T A(I), the two bound values, the
    quadratic bound right-hand side, the achieved error and the numerical
    rank of B. When G_1 is numerically singular the fields that depend on
    H = Z_2 Z_1^{-1} are left unset and singular_z1 is flagged.
    """
    A = as_matrix(A)
    if approx.seed_indices is None:
        raise ValueError("bound_report requires an approximation with seed_indices")
    idx = np.asarray(approx.seed_indices)
    k = idx.size
    q = approx.q
    d, m = A.shape

    res = svd_full(A)
    s = np.zeros(d)
    s[: res.S.size] = res.S
    sigma_k = float(s[k - 1])
    sigma_k1 = float(s[k]) if k < d else 0.0

    AI = np.ascontiguousarray(A[:, idx])
    s_ai = singular_values(AI)
    sigma_min_ai = float(s_ai[-1])
    rho = sigma_min_ai - sigma_k1

    G = res.U.T @ AI  # r x k; conceptual rows beyond r are exactly zero
    G1 = G[:k, :]
    G2 = G[k:, :]
    s_g1 = singular_values(G1)
    g1_min = float(s_g1[-1])
    g2_max = float(singular_values(G2)[0]) if G2.shape[0] else 0.0

    if sigma_k1 == 0.0:
        err_bound = 0.0
        mrg_bound = 0.0 if rho > 0 else float("nan")
    else:
        # numpy scalar power overflows to inf (q = 0 makes the exponent
        # negative, and the ratio can be arbitrarily small)
        with np.errstate(over="ignore", divide="ignore"):
            ratio_pow = np.float64(sigma_k1 / sigma_k) ** (4 * q - 2)
            err_bound = sigma_k1 * np.sqrt(1.0 + ratio_pow / BOUND_MARGIN_CONSTANT)
            mrg_bound = (
                sigma_k1 * np.sqrt(1.0 + (sigma_k1 / rho) ** 2 * ratio_pow)
                if rho > 0
                else float("nan")
            )

    singular_z1 = sigma_k <= 0.0 or g1_min < _SINGULAR_G1_REL * float(s_g1[0])
    quadratic_rhs = None
    if not singular_z1:
        r1 = svd_full(G1)
        g1_inv = (r1.V / r1.S) @ r1.U.T
        G21 = G2 @ g1_inv
        # H S_1 = S_2^{2q} (G_2 G_1^{-1}) S_1^{1-2q}, evaluated through the
        # bounded ratios (s_{k+i}/s_j)^{2q} * s_j to avoid overflow
        tail = s[k : k + G2.shape[0]]
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(
                tail[:, None] > 0.0,
                (tail[:, None] / s[None, :k]) ** (2 * q) * s[None, :k],
                0.0,
            )
        hs1 = G21 * scale
        hs1_norm = float(singular_values(hs1)[0]) if hs1.size else 0.0
        quadratic_rhs = hs1_norm**2 + sigma_k1**2

    achieved = float(singular_values(A - approx.B)[0])
    s_b = singular_values(approx.B)
    rank_b = int(np.sum(s_b > _RANK_B_REL * s_b[0])) if s_b[0] > 0 else 0

    return BoundReport(
        sigma_k=sigma_k,
        sigma_k1=sigma_k1,
        sigma_min_AI=sigma_min_ai,
        rho=rho,
        g1_min=g1_min,
        g2_max=g2_max,
        error_bound=float(err_bound),
        margin_bound=float(mrg_bound),
        quadratic_rhs=quadratic_rhs,
        achieved_error=achieved,
        rank_b=rank_b,
        q=q,
        singular_z1=singular_z1,
    )
