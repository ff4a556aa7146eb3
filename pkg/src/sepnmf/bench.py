"""Benchmark suites behind the `bench` subcommand.

fig1     approximation error of the seeded-column rank-k engine across a
         noise grid and power exponents.
fig2     recovery rate of the selector family across the same grid.
tab2     wall time and error of the rank-k engines against the truncated
         SVD on wide shapes.
kernels  numba backend against the pure-numpy fallback on the hot kernels.

Every row carries enough seeds to reproduce it. Suites emit CSV + JSON
plus a plain-text summary. Instance-level work can fan out over
processes (--jobs); results are reassembled in task order so the output
does not depend on the worker count.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import kernels
from .backend import HAS_NUMBA
from .io import write_csv_rows, write_json
from .linalg import spectral_norm, svd_truncated
from .lowrank import rand_subspace_approx, spa_rank_approx
from .metrics import recovery_rate
from .rng import SplitMix64
from .select import (
    erspa_select,
    merspa_select,
    mpspa_select,
    prewhiten_spa_select,
    pspa_select,
    spaspa_select,
)
from .spa import spa_select
from .synth import generate_instance, rescale_noise, sigma_min

DELTA_GRID = [round(0.1 * i, 1) for i in range(21)]  # multipliers of sigma_min(F)
Q_GRID = [1, 2, 5, 10, 15]

FIG2_METHODS = [
    ("spa", None),
    ("pspa", None),
    ("mpspa", 1),
    ("mpspa", 2),
    ("mpspa", 5),
    ("mpspa", 10),
    ("mpspa", 15),
    ("erspa", None),
    ("merspa", 1),
    ("merspa", 15),
]

_SCALES = {
    "desk": {"fig_shape": (50, 2000, 10), "fig_instances": 20},
    "tiny": {"fig_shape": (20, 300, 4), "fig_instances": 3},
}

_TAB2_SHAPES = {
    "desk": [(50, 3000, 10), (50, 5000, 10), (100, 1000, 10), (100, 20000, 10)],
    "tiny": [(20, 400, 5), (30, 300, 5)],
}


def _run_tasks(tasks, worker, jobs):
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks, chunksize=1))


def run_selector(A, method, k, q, eps=1e-6, boundary_tol=1e-3):
    """Dispatch one selector by CLI name; returns its SelectorResult-like indices."""
    if method == "spa":
        t0 = time.perf_counter()
        idx = spa_select(A, k)
        return idx, {"spa": time.perf_counter() - t0}, ()
    if method == "pspa":
        r = pspa_select(A, k, eps)
    elif method == "mpspa":
        r = mpspa_select(A, k, 10 if q is None else q, eps)
    elif method == "erspa":
        r = erspa_select(A, k, eps, boundary_tol)
    elif method == "merspa":
        r = merspa_select(A, k, 10 if q is None else q, eps, boundary_tol)
    elif method == "prewhiten":
        r = prewhiten_spa_select(A, k)
    elif method == "spaspa":
        r = spaspa_select(A, k)
    else:
        raise ValueError(f"unknown selector {method!r}")
    return r.indices, r.timing, r.notes


def _fig1_worker(task):
    d, m, k, seed, q_list, deltas = task
    base = generate_instance(d, m, k, 1.0, seed)
    smin = sigma_min(base.F)
    rows = []
    for t in deltas:
        inst = rescale_noise(base, t * smin)
        for q in q_list:
            ap = spa_rank_approx(inst.A, k, q)
            rows.append(
                {
                    "delta_mult": t,
                    "delta": inst.delta,
                    "q": q,
                    "abs_error": ap.error2,
                    "seed": seed,
                    "timing": ap.timings,
                }
            )
    return rows


def fig1_suite(out_dir, scale="desk", seed=0, jobs=1, q_list=None, deltas=None, instances=None):
    cfg = _SCALES[scale]
    d, m, k = cfg["fig_shape"]
    n_inst = instances or cfg["fig_instances"]
    q_list = q_list or Q_GRID
    deltas = deltas if deltas is not None else DELTA_GRID
    tasks = [(d, m, k, seed * 100_003 + i, tuple(q_list), tuple(deltas)) for i in range(n_inst)]
    records = [row for rows in _run_tasks(tasks, _fig1_worker, jobs) for row in rows]
    csv_rows = []
    for t in deltas:
        for q in q_list:
            sel = [r for r in records if r["delta_mult"] == t and r["q"] == q]
            mean_err = float(np.mean([r["abs_error"] for r in sel]))
            mean_delta = float(np.mean([r["delta"] for r in sel]))
            csv_rows.append((mean_delta, q, mean_err, mean_delta))
    _emit(
        out_dir,
        "fig1",
        ["delta", "q", "mean_abs_error", "best_error_upper"],
        csv_rows,
        {"shape": [d, m, k], "instances": n_inst, "seed": seed, "records": records},
    )
    return csv_rows, records


def _fig2_worker(task):
    d, m, k, seed, methods, deltas, eps = task
    base = generate_instance(d, m, k, 1.0, seed)
    smin = sigma_min(base.F)
    rows = []
    for t in deltas:
        inst = rescale_noise(base, t * smin)
        for method, q in methods:
            idx, timing, notes = run_selector(inst.A, method, k, q, eps)
            rows.append(
                {
                    "delta_mult": t,
                    "delta": inst.delta,
                    "method": method,
                    "q": q,
                    "recovery_rate": recovery_rate(idx, inst.true_indices),
                    "seed": seed,
                    "timing": timing,
                    "notes": list(notes),
                }
            )
    return rows


def fig2_suite(
    out_dir,
    scale="desk",
    seed=0,
    jobs=1,
    methods=None,
    deltas=None,
    instances=None,
    eps=1e-6,
):
    cfg = _SCALES[scale]
    d, m, k = cfg["fig_shape"]
    n_inst = instances or cfg["fig_instances"]
    methods = methods or FIG2_METHODS
    deltas = deltas if deltas is not None else DELTA_GRID
    tasks = [
        (d, m, k, seed * 100_003 + i, tuple(methods), tuple(deltas), eps) for i in range(n_inst)
    ]
    records = [row for rows in _run_tasks(tasks, _fig2_worker, jobs) for row in rows]
    csv_rows = []
    for t in deltas:
        for method, q in methods:
            sel = [
                r
                for r in records
                if r["delta_mult"] == t and r["method"] == method and r["q"] == q
            ]
            mean_delta = float(np.mean([r["delta"] for r in sel]))
            mean_rec = float(np.mean([r["recovery_rate"] for r in sel]))
            csv_rows.append((mean_delta, method, "" if q is None else q, mean_rec))
    _emit(
        out_dir,
        "fig2",
        ["delta", "method", "q", "mean_recovery"],
        csv_rows,
        {"shape": [d, m, k], "instances": n_inst, "seed": seed, "records": records},
    )
    return csv_rows, records


def _tab2_worker(task):
    d, m, k, q, seed, delta_mult = task
    base = generate_instance(d, m, k, 1.0, seed)
    inst = rescale_noise(base, delta_mult * sigma_min(base.F))
    A = inst.A
    norm_a = spectral_norm(A, 1e-9)
    out = []

    t0 = time.perf_counter()
    ap = spa_rank_approx(A, k, q)
    t_spa = time.perf_counter() - t0 - ap.timings["error_norm"]
    out.append(("spa", q, t_spa, ap.error2, ap.error2 / norm_a))

    t0 = time.perf_counter()
    rp = rand_subspace_approx(A, k, q, 0, seed)
    t_rand = time.perf_counter() - t0 - rp.timings["error_norm"]
    out.append(("rand", q, t_rand, rp.error2, rp.error2 / norm_a))

    t0 = time.perf_counter()
    f = svd_truncated(A, k)
    B = f.U @ (f.S[:, None] * f.V.T)
    t_svd = time.perf_counter() - t0
    err = spectral_norm(A - B, 1e-9)
    out.append(("svd", "", t_svd, err, err / norm_a))
    return [
        {
            "d": d,
            "m": m,
            "k": k,
            "method": method,
            "q": qq,
            "seed": seed,
            "time_seconds": tt,
            "abs_error": e,
            "rel_error": re,
        }
        for method, qq, tt, e, re in out
    ]


def tab2_suite(out_dir, scale="desk", seed=0, jobs=1, reps=3, delta_mult=1.0, q=10, shapes=None):
    shapes = shapes or _TAB2_SHAPES[scale]
    tasks = [
        (d, m, k, q, seed * 100_003 + rep, delta_mult)
        for d, m, k in shapes
        for rep in range(reps)
    ]
    records = [row for rows in _run_tasks(tasks, _tab2_worker, jobs) for row in rows]
    csv_rows = []
    for d, m, k in shapes:
        for method in ("spa", "rand", "svd"):
            sel = [r for r in records if (r["d"], r["m"], r["method"]) == (d, m, method)]
            csv_rows.append(
                (
                    d,
                    m,
                    k,
                    method,
                    "" if method == "svd" else q,
                    float(np.mean([r["time_seconds"] for r in sel])),
                    float(np.mean([r["abs_error"] for r in sel])),
                    float(np.mean([r["rel_error"] for r in sel])),
                )
            )
    _emit(
        out_dir,
        "tab2",
        ["d", "m", "k", "method", "q", "mean_time_s", "mean_abs_error", "mean_rel_error"],
        csv_rows,
        {"shapes": shapes, "reps": reps, "seed": seed, "q": q, "records": records},
    )
    return csv_rows, records


def _kernel_workloads(seed=0):
    r = SplitMix64(seed)
    X = r.normal_matrix(40, 1500)
    W = r.normal_matrix(12, 800)
    A = np.ascontiguousarray(r.normal_matrix(40, 4000))
    pts = np.ascontiguousarray(r.normal_matrix(300, 8))

    def svd_load(fn):
        Xc = X.copy()
        fn(Xc, np.eye(40), 1e-14, 0.0, 60)

    def mgs_load(fn):
        Wc = W.copy()
        fn(Wc, 1e-12, np.zeros(12, np.int64))

    def spa_load(fn):
        fn(A, 10, 1e-12 * float(np.linalg.norm(A)), np.zeros(10, np.int64))

    def mvee_load(fn):
        mw = pts.shape[0]
        u = np.full(mw, 1.0 / mw)
        M = (pts * u[:, None]).T @ pts
        minv = np.ascontiguousarray(np.linalg.inv(M))
        kappa = np.einsum("ij,jl,il->i", pts, minv, pts)
        fn(pts, u, minv, kappa, 1e-7, 100_000, 10**9)

    return {
        "svd_jacobi_rows": (svd_load, "40x1500"),
        "mgs_rows": (mgs_load, "12x800"),
        "spa_core": (spa_load, "40x4000 k=10"),
        "mvee_ascent": (mvee_load, "300 pts in R^8"),
    }


def kernels_suite(out_dir, scale="desk", seed=0, jobs=1, repeats=3):
    """Best-of-N wall time for each hot kernel on both backends."""
    loads = _kernel_workloads(seed)
    csv_rows = []
    records = []
    for name, (load, shape) in loads.items():
        times = {}
        for backend in ("numpy", "numba") if HAS_NUMBA else ("numpy",):
            fn = kernels.get_kernel(name, backend)
            load(fn)  # warm-up (and JIT compile)
            best = min(_timed(load, fn) for _ in range(repeats))
            times[backend] = best
        speedup = times["numpy"] / times["numba"] if "numba" in times else ""
        csv_rows.append(
            (name, shape, times["numpy"], times.get("numba", ""), speedup)
        )
        records.append({"kernel": name, "shape": shape, "seed": seed, "times": times})
    _emit(
        out_dir,
        "kernels",
        ["kernel", "shape", "numpy_best_s", "numba_best_s", "speedup"],
        csv_rows,
        {"repeats": repeats, "seed": seed, "records": records},
    )
    return csv_rows, records


def _timed(load, fn):
    t0 = time.perf_counter()
    load(fn)
    return time.perf_counter() - t0


def _emit(out_dir, name, header, csv_rows, meta):
    os.makedirs(out_dir, exist_ok=True)
    write_csv_rows(os.path.join(out_dir, f"{name}.csv"), header, csv_rows)
    write_json(os.path.join(out_dir, f"{name}.json"), meta)


SUITES = {
    "fig1": fig1_suite,
    "fig2": fig2_suite,
    "tab2": tab2_suite,
    "kernels": kernels_suite,
}


def run_suites(names, out_dir, scale="desk", seed=0, jobs=1):
    """Run the named suites; returns (ok_rows, failures, summary_text)."""
    ok_rows = 0
    failures = []
    lines = [f"bench scale={scale} seed={seed} jobs={jobs}"]
    for name in names:
        t0 = time.perf_counter()
        try:
            rows, _ = SUITES[name](out_dir, scale=scale, seed=seed, jobs=jobs)
            ok_rows += len(rows)
            lines.append(f"{name}: {len(rows)} rows in {time.perf_counter() - t0:.1f}s")
        except Exception as exc:  # partial failures carry their error strings
            failures.append((name, str(exc)))
            lines.append(f"{name}: FAILED ({exc})")
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(summary)
    return ok_rows, failures, summary
