"""Independent reference implementations used only by the tests.

These deliberately take the slow, obvious route so they share no code
path with the production implementations they check: the selection
oracle materializes full projectors, the ellipsoid oracle runs plain
coordinate ascent on the complete point set to near-exact precision, and
the abundance oracle enumerates every support pattern.
"""

import itertools

import numpy as np


def naive_spa(A, k):
    """Selection by explicit projector deflation, O(d^2 m k)."""
    S = np.array(A, dtype=float)
    d = S.shape[0]
    idx = []
    for _ in range(k):
        norms = (S * S).sum(axis=0)
        j = int(np.argmax(norms))
        idx.append(j)
        t = S[:, j].copy()
        P = np.eye(d) - np.outer(t, t) / float(t @ t)
        S = P @ S
    return np.asarray(idx)


def khachiyan_logdet(P, eps=1e-10, max_iter=500_000):
    """High-precision dual ascent on the full point set; returns log det L.

    Frank-Wolfe steps with away steps, periodic from-scratch refresh of the
    inverse to keep the incremental updates honest.
    """
    pts = np.array(P.T, dtype=float)
    mw, k = pts.shape
    u = np.full(mw, 1.0 / mw)

    def refresh():
        M = (pts * u[:, None]).T @ pts
        minv = np.linalg.inv(M)
        kappa = np.einsum("ij,jl,il->i", pts, minv, pts)
        return minv, kappa

    minv, kappa = refresh()
    for it in range(max_iter):
        jmax = int(np.argmax(kappa))
        masked = np.where(u > 0, kappa, np.inf)
        jmin = int(np.argmin(masked))
        if kappa[jmax] <= k * (1 + eps) and kappa[jmin] >= k * (1 - eps):
            break
        if kappa[jmax] - k >= k - kappa[jmin]:
            j, kap = jmax, kappa[jmax]
            beta = (kap - k) / (k * (kap - 1.0))
        else:
            j, kap = jmin, kappa[jmin]
            bmin = -u[j] / (1.0 - u[j])
            beta = (kap - k) / (k * (kap - 1.0)) if kap > 1.0 else bmin
            beta = max(beta, bmin)
        c = 1.0 - beta
        mp = minv @ pts[j]
        w = pts @ mp
        gamma = beta / (c * (c + beta * kap))
        u *= c
        u[j] = max(u[j] + beta, 0.0)
        kappa = kappa / c - gamma * w * w
        minv = minv / c - gamma * np.outer(mp, mp)
        if (it + 1) % 500 == 0:
            minv, kappa = refresh()
    M = (pts * u[:, None]).T @ pts
    L = np.linalg.inv(M) / k
    sign, logdet = np.linalg.slogdet(L)
    assert sign > 0
    return logdet, L, u


def simplex_lsq_oracle(F, a):
    """argmin ||F w - a||^2 over the simplex by support enumeration."""
    k = F.shape[1]
    best_obj = np.inf
    best_w = None
    for r in range(1, k + 1):
        for support in itertools.combinations(range(k), r):
            S = list(support)
            FS = F[:, S]
            G = FS.T @ FS
            kkt = np.zeros((r + 1, r + 1))
            kkt[:r, :r] = G
            kkt[:r, r] = 1.0
            kkt[r, :r] = 1.0
            rhs = np.concatenate([FS.T @ a, [1.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            w_s = sol[:r]
            if w_s.min() < -1e-12:
                continue
            w = np.zeros(k)
            w[S] = np.clip(w_s, 0.0, None)
            w /= w.sum()
            obj = float(np.sum((F @ w - a) ** 2))
            if obj < best_obj:
                best_obj = obj
                best_w = w
    return best_w, best_obj


def projector_approx(Y, A):
    """B = Y (Y^T Y)^{-1} Y^T A via the normal equations."""
    G = Y.T @ Y
    return Y @ np.linalg.solve(G, Y.T @ A)


def splitmix64_reference(seed, n):
    """Pure-Python splitmix64 (sequential form) for cross-checking."""
    mask = (1 << 64) - 1
    state = seed & mask
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out
