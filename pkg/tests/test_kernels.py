"""The numba-compiled kernels and the pure-numpy fallback must agree."""

import numpy as np
import pytest

from sepnmf.backend import HAS_NUMBA
from sepnmf.kernels import get_kernel, kernel_names
from sepnmf.rng import SplitMix64

needs_numba = pytest.mark.skipif(not HAS_NUMBA, reason="numba unavailable")


def test_kernel_registry():
    assert kernel_names() == ["mgs_rows", "mvee_ascent", "spa_core", "svd_jacobi_rows"]


@needs_numba
def test_svd_jacobi_rows_backends_agree():
    X0 = SplitMix64(1).normal_matrix(12, 200)
    outs = {}
    for backend in ("numpy", "numba"):
        X = X0.copy()
        R = np.eye(12)
        get_kernel("svd_jacobi_rows", backend)(X, R, 1e-14, 0.0, 60)
        outs[backend] = (X, R)
    assert np.allclose(outs["numpy"][0], outs["numba"][0], atol=1e-10)
    assert np.allclose(outs["numpy"][1], outs["numba"][1], atol=1e-10)


@needs_numba
def test_mgs_rows_backends_agree():
    W0 = SplitMix64(2).normal_matrix(8, 60)
    outs = {}
    for backend in ("numpy", "numba"):
        W = W0.copy()
        order = np.zeros(8, np.int64)
        rank = get_kernel("mgs_rows", backend)(W, 1e-12, order)
        outs[backend] = (rank, order.copy(), W)
    assert outs["numpy"][0] == outs["numba"][0]
    assert np.array_equal(outs["numpy"][1], outs["numba"][1])
    assert np.allclose(outs["numpy"][2], outs["numba"][2], atol=1e-12)


@needs_numba
def test_spa_core_backends_agree():
    A = np.ascontiguousarray(SplitMix64(3).normal_matrix(15, 300))
    outs = {}
    for backend in ("numpy", "numba"):
        idx = np.zeros(6, np.int64)
        rounds, status = get_kernel("spa_core", backend)(
            A, 6, 1e-12 * float(np.linalg.norm(A)), idx
        )
        outs[backend] = (rounds, status, idx.copy())
    assert outs["numpy"][0] == outs["numba"][0]
    assert outs["numpy"][1] == outs["numba"][1]
    assert np.array_equal(outs["numpy"][2], outs["numba"][2])


@needs_numba
def test_mvee_ascent_backends_agree():
    pts = np.ascontiguousarray(SplitMix64(4).normal_matrix(120, 5))
    outs = {}
    for backend in ("numpy", "numba"):
        mw = pts.shape[0]
        u = np.full(mw, 1.0 / mw)
        M = (pts * u[:, None]).T @ pts
        minv = np.ascontiguousarray(np.linalg.inv(M))
        kappa = np.einsum("ij,jl,il->i", pts, minv, pts)
        status, iters = get_kernel("mvee_ascent", backend)(
            pts, u, minv, kappa, 1e-7, 100_000, 10**9
        )
        outs[backend] = (status, iters, u.copy(), minv.copy())
    assert outs["numpy"][0] == outs["numba"][0] == 0
    assert outs["numpy"][1] == outs["numba"][1]
    assert np.allclose(outs["numpy"][2], outs["numba"][2], atol=1e-12)
    assert np.allclose(outs["numpy"][3], outs["numba"][3], atol=1e-9)
