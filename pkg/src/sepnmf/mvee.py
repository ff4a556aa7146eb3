"""Minimum-volume origin-centered enclosing ellipsoid.

Solves  minimize -log det(L)  s.t.  p^T L p <= 1 for every point p,
L positive definite, through the dual D-optimal design: ascend
log det M(u) over the weight simplex (Wolfe-Atwood coordinate steps with
away steps), inside a cutting-plane outer loop that starts from the 10k
largest-norm points and repeatedly adds the worst violators. At the
solution L = M(u)^{-1} / k and the Kiefer-Wolfowitz gap certifies
log det(L) >= log det(L_opt) - k log(1+eps).
"""

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, NoConvergenceError, RankDeficientError
from .linalg import as_matrix, eigh_sym, orthonormalize

DEFAULT_EPS = 1e-6
MAX_INNER_ITERS = 100_000
MAX_OUTER_ROUNDS = 200
_REFRESH_EVERY = 1000
_SUPPORT_TOL = 1e-8
_EIG_FLOOR_REL = 1e-14


@dataclass
class Ellipsoid:
    """Solution of the enclosing-ellipsoid problem plus its certificate."""

    L: np.ndarray
    weights: np.ndarray
    support: np.ndarray
    max_violation: float
    iterations: int
    wall_seconds: float = 0.0


def _inv_psd(M):
    lam, V = eigh_sym(M)
    floor = _EIG_FLOOR_REL * float(lam.sum())
    lam = np.maximum(lam, max(floor, 1e-300))
    return (V / lam) @ V.T


def solve_mvee(P, eps=DEFAULT_EPS):
    """Ellipsoid for the columns of the k x m point matrix P.

    Requires rank(P) = k and eps in (0, 0.5). Deterministic. Raises
    NoConvergence (carrying the last iterate) if the iteration budget is
    exhausted before the certificate holds.
    """
    t0 = time.perf_counter()
    P = as_matrix(P, "P")
    k, m = P.shape
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    if m < k:
        raise RankDeficientError(f"need at least k={k} points, got {m}")
    if orthonormalize(P.T).shape[1] < k:
        raise RankDeficientError(f"points span fewer than k={k} dimensions")

    pts = np.ascontiguousarray(P.T)  # one point per row
    if k == 1:
        return _solve_1d(pts[:, 0], t0)

    norms = np.einsum("ij,ij->i", pts, pts)
    order = np.argsort(-norms, kind="stable")
    ws = np.sort(order[: min(10 * k, m)])
    in_ws = np.zeros(m, dtype=bool)
    in_ws[ws] = True

    u_full = np.zeros(m)
    u_full[ws] = 1.0 / ws.size
    total_iters = 0

    for _round in range(MAX_OUTER_ROUNDS):
        Pw = np.ascontiguousarray(pts[ws])
        u = np.ascontiguousarray(u_full[ws])
        s = u.sum()
        u = u / s if s > 0 else np.full(ws.size, 1.0 / ws.size)
        converged = False
        while total_iters < MAX_INNER_ITERS:
            M = (Pw * u[:, None]).T @ Pw
            minv = np.ascontiguousarray(_inv_psd(M))
            kappa = np.einsum("ij,jl,il->i", Pw, minv, Pw)
            status, done = kernels.mvee_ascent(
                Pw, u, minv, kappa, eps, MAX_INNER_ITERS - total_iters, _REFRESH_EVERY
            )
            total_iters += done
            if status == 0:
                converged = True
                break
            if status == 2:
                break
        u_full[:] = 0.0
        u_full[ws] = u
        ell = _finalize(pts, u_full, k, total_iters, t0)
        if not converged:
            raise NoConvergenceError(
                f"ellipsoid ascent hit {MAX_INNER_ITERS} iterations "
                f"(violation {ell.max_violation:.3e})",
                ellipsoid=ell,
            )
        if ell.max_violation <= eps:
            return ell
        # admit the worst violators, at most k per round
        kap_full = k * (1.0 + _violations(pts, ell.L))
        viol = np.flatnonzero(~in_ws & (kap_full > k * (1.0 + eps)))
        if viol.size == 0:
            return ell
        worst = viol[np.argsort(-kap_full[viol], kind="stable")][: min(k, viol.size)]
        in_ws[worst] = True
        ws = np.flatnonzero(in_ws)
        u_full[ws] = np.maximum(u_full[ws], 1e-12)

    ell = _finalize(pts, u_full, k, total_iters, t0)
    raise NoConvergenceError(
        f"cutting-plane loop exceeded {MAX_OUTER_ROUNDS} rounds "
        f"(violation {ell.max_violation:.3e})",
        ellipsoid=ell,
    )


def _violations(pts, L):
    return np.einsum("ij,jl,il->i", pts, L, pts) - 1.0


def _finalize(pts, u_full, k, iters, t0):
    M = (pts * u_full[:, None]).T @ pts
    L = _inv_psd(M) / k
    L = 0.5 * (L + L.T)
    viol = float(_violations(pts, L).max())
    support = np.flatnonzero(u_full > _SUPPORT_TOL)
    return Ellipsoid(
        L=L,
        weights=u_full,
        support=support,
        max_violation=viol,
        iterations=iters,
        wall_seconds=time.perf_counter() - t0,
    )


def _solve_1d(xs, t0):
    j = int(np.argmax(np.abs(xs)))
    top = xs[j] * xs[j]
    if top <= 0.0:
        raise RankDeficientError("all points are zero")
    u = np.zeros(xs.size)
    u[j] = 1.0
    L = np.array([[1.0 / top]])
    viol = float((xs * xs / top).max() - 1.0)
    return Ellipsoid(
        L=L,
        weights=u,
        support=np.array([j]),
        max_violation=viol,
        iterations=0,
        wall_seconds=time.perf_counter() - t0,
    )


def ellipsoid_support(L, P):
    """Quadratic form p^T L p for every column p of P.

    Accepts either an Ellipsoid or a bare k x k matrix.
    """
    Lm = L.L if isinstance(L, Ellipsoid) else np.asarray(L, dtype=np.float64)
    P = as_matrix(P, "P")
    if Lm.shape[0] != Lm.shape[1] or Lm.shape[0] != P.shape[0]:
        raise DimensionMismatchError(
            f"L is {Lm.shape} but points have dimension {P.shape[0]}"
        )
    return np.einsum("ji,jl,li->i", P, Lm, P)
