"""Command-line surface.

Subcommands: synth (instance generation), approx (rank-k approximation),
select (endmember/column selection, single or batch), unmix
(hyperspectral pipeline), bench (experiment suites). Exit codes: 0 ok,
2 usage, 3 computation error, 4 benchmark produced no rows. Indices are
1-based in all user-facing output and 0-based internally.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import __version__, bench
from .errors import MissingShapeError, SepnmfError
from .io import (
    read_json,
    read_matrix,
    sha256_of,
    write_csv_rows,
    write_json,
    write_matrix,
    write_pgm,
)
from .linalg import spectral_norm, svd_truncated
from .lowrank import bound_report, rand_subspace_approx, spa_rank_approx
from .metrics import estimate_abundances, recovery_rate, spectral_angle_distance
from .reports import ExperimentReport, write_report
from .rng import RNG_NAME
from .synth import generate_instance, robust_noise_bound, sigma_min

SELECTOR_NAMES = ("spa", "pspa", "mpspa", "erspa", "merspa", "prewhiten", "spaspa")


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, help="base seed (default 0)",
                        **({"default": default} if suppress else {"default": 0}))
    parser.add_argument("--jobs", type=int, help="parallel workers for batch suites",
                        **({"default": default} if suppress else {"default": 1}))
    parser.add_argument("--format", choices=("mtx", "bin", "csv"), help="matrix file format",
                        default=argparse.SUPPRESS if suppress else None)
    parser.add_argument("--eps", type=float, help="ellipsoid tolerance",
                        **({"default": default} if suppress else {"default": 1e-6}))
    parser.add_argument("--tol", type=float, help="spectral-norm tolerance",
                        **({"default": default} if suppress else {"default": 1e-10}))


def build_parser():
    p = argparse.ArgumentParser(prog="sepnmf", description=__doc__)
    p.add_argument("--version", action="version", version=f"sepnmf {__version__}")
    _global_flags(p, suppress=False)
    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering the top-level defaults when absent
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a noisy separable instance", parents=[common])
    s.add_argument("-d", type=int, required=True)
    s.add_argument("-m", type=int, required=True)
    s.add_argument("-k", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.0, help="spectral norm of the noise")
    s.add_argument("--alpha", type=str, help="comma list of k Dirichlet parameters in (0,1]")
    s.add_argument("-o", "--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("approx", help="rank-k approximation of a matrix file", parents=[common])
    a.add_argument("matrix")
    a.add_argument("-k", type=int, required=True)
    a.add_argument("--q", type=int, default=10)
    a.add_argument("--method", choices=("spa", "rand", "svd"), default="spa")
    a.add_argument("--oversample", type=int, default=0)
    a.add_argument("--bounds", action="store_true", help="attach bound diagnostics (method=spa)")
    a.add_argument("--truth", help="instance meta.json for the noise-hypothesis flag")
    a.add_argument("--report", required=True, help="output report JSON")
    a.set_defaults(func=cmd_approx)

    c = sub.add_parser("select", help="column selection, single matrix or seeded batch", parents=[common])
    c.add_argument("matrix", nargs="?", help="matrix file (omit in batch mode)")
    c.add_argument("-k", type=int, required=True)
    c.add_argument("--method", default="spa", help="|".join(SELECTOR_NAMES))
    c.add_argument("--q", type=int, help="power exponent for mpspa/merspa (default 10)")
    c.add_argument("--boundary-tol", type=float, default=1e-3)
    c.add_argument("--truth", help="meta.json with ground-truth indices")
    c.add_argument("--report", help="output report JSON")
    c.add_argument("--instances", type=int, help="batch mode: instances per grid cell")
    c.add_argument("-d", type=int, help="batch mode: rows")
    c.add_argument("-m", type=int, help="batch mode: columns")
    c.add_argument("--deltas", type=str, default="0,0.5,1.0,1.5,2.0", help="batch noise grid")
    c.add_argument(
        "--delta-unit",
        choices=("sigmin", "abs"),
        default="sigmin",
        help="deltas are multipliers of sigma_min(F) or absolute",
    )
    c.add_argument("--methods", type=str, help="batch methods, e.g. spa,pspa,mpspa:1,mpspa:15")
    c.add_argument("--out", help="batch mode: output CSV")
    c.set_defaults(func=cmd_select)

    u = sub.add_parser("unmix", help="endmember extraction + abundance maps", parents=[common])
    u.add_argument("matrix", help="bands x pixels matrix file")
    u.add_argument("-k", type=int, required=True)
    u.add_argument("--method", default="pspa", help="|".join(SELECTOR_NAMES))
    u.add_argument("--q", type=int)
    u.add_argument("--meta", help="sidecar JSON with height/width (default <matrix>.json)")
    u.add_argument("--library", help="CSV of reference spectra (header = material names)")
    u.add_argument("--drop-bands", type=str, help="1-based bands to drop, e.g. 1-4,76,101-111")
    u.add_argument("--rasters", action="store_true", help="require PGM abundance rasters")
    u.add_argument("--expect-match", metavar="METHOD", help="exit 0 iff this method picks the same set")
    u.add_argument("--out", required=True, help="output directory")
    u.set_defaults(func=cmd_unmix)

    b = sub.add_parser("bench", help="experiment suites", parents=[common])
    b.add_argument("suite", choices=("fig1", "fig2", "tab2", "kernels", "all"))
    b.add_argument("--scale", choices=("desk", "tiny"), default="desk")
    b.add_argument("--out", required=True, help="output directory")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except SepnmfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        report_path = getattr(args, "report", None)
        if report_path:
            write_report(
                report_path,
                ExperimentReport(
                    method=getattr(args, "method", args.command),
                    parameters=_params_from(args),
                    records=[],
                    error=str(exc),
                ),
            )
        return 3


def _params_from(args):
    keys = ("d", "m", "k", "q", "delta", "eps", "seed", "oversample", "method", "instances")
    return {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}


def _parse_floats(text):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def cmd_synth(args):
    alpha = np.asarray(_parse_floats(args.alpha)) if args.alpha else None
    inst = generate_instance(args.d, args.m, args.k, args.delta, args.seed, alpha)
    fmt = args.format or "mtx"
    os.makedirs(args.out, exist_ok=True)
    matrix_file = f"A.{fmt}"
    write_matrix(os.path.join(args.out, matrix_file), inst.A, fmt)
    meta = {
        "schema": "sepnmf-instance-v1",
        "d": args.d,
        "m": args.m,
        "k": args.k,
        "delta": inst.delta,
        "seed": inst.seed,
        "dirichlet_alpha": inst.dirichlet_alpha.tolist(),
        "true_indices_1based": (inst.true_indices + 1).tolist(),
        "F": inst.F.tolist(),
        "H_sha256": sha256_of(inst.H),
        "N_sha256": sha256_of(inst.N),
        "A_sha256": sha256_of(inst.A),
        "sigma_min_F": sigma_min(inst.F),
        "robust_noise_bound": robust_noise_bound(inst.F),
        "sigma_k1_upper": inst.delta,
        "matrix_file": matrix_file,
        "toolkit_version": __version__,
        "rng_name": RNG_NAME,
    }
    write_json(os.path.join(args.out, "meta.json"), meta)
    print(f"wrote {args.out}/{matrix_file} and {args.out}/meta.json")


def _load_truth(path, A=None):
    meta = read_json(path)
    truth = np.asarray(meta["true_indices_1based"], dtype=np.int64) - 1
    if A is not None and "A_sha256" in meta and sha256_of(A) != meta["A_sha256"]:
        raise SepnmfError(f"{path} does not describe this matrix (digest mismatch)")
    return meta, truth


def cmd_approx(args):
    A = read_matrix(args.matrix, args.format)
    k, q = args.k, args.q
    record = {"seed": args.seed, "q": q}
    bound_fields = None
    if args.method == "spa":
        ap = spa_rank_approx(A, k, q, err_tol=args.tol)
        record["abs_error"] = ap.error2
        record["timing"] = ap.timings
        if args.bounds:
            rep = bound_report(A, ap)
            bound_fields = {f: getattr(rep, f) for f in (
                "sigma_k", "sigma_k1", "sigma_min_AI", "rho", "g1_min", "g2_max",
                "error_bound", "margin_bound", "quadratic_rhs", "achieved_error",
                "rank_b", "q", "singular_z1",
            )}
            bound_fields["hypothesis_satisfied"] = "not_applicable"
            if args.truth:
                meta, _ = _load_truth(args.truth, A)
                if "robust_noise_bound" in meta and "delta" in meta:
                    bound_fields["hypothesis_satisfied"] = bool(
                        meta["delta"] < meta["robust_noise_bound"]
                    )
    elif args.method == "rand":
        ap = rand_subspace_approx(A, k, q, args.oversample, args.seed, err_tol=args.tol)
        record["abs_error"] = ap.error2
        record["timing"] = ap.timings
        if args.bounds:
            print("note: --bounds applies to method=spa only; skipped", file=sys.stderr)
    else:
        t0 = time.perf_counter()
        f = svd_truncated(A, k)
        B = f.U @ (f.S[:, None] * f.V.T)
        t1 = time.perf_counter()
        record["abs_error"] = spectral_norm(A - B, args.tol)
        record["timing"] = {"svd": t1 - t0, "error_norm": time.perf_counter() - t1}
    record["rel_error"] = record["abs_error"] / spectral_norm(A, args.tol)
    report = ExperimentReport(
        method=args.method,
        parameters={"d": A.shape[0], "m": A.shape[1], "k": k, "q": q,
                    "oversample": args.oversample, "seed": args.seed,
                    "matrix": os.path.basename(args.matrix)},
        records=[record],
        bound_fields=bound_fields,
    )
    write_report(args.report, report)
    print(f"{args.method}: abs_error={record['abs_error']:.6g} rel_error={record['rel_error']:.6g}")


def _parse_method_spec(text):
    methods = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        name, _, qtxt = tok.partition(":")
        if name not in SELECTOR_NAMES:
            raise SepnmfError(f"unknown selector {name!r}")
        methods.append((name, int(qtxt) if qtxt else None))
    return methods


def cmd_select(args):
    if args.instances:
        return _select_batch(args)
    if not args.matrix:
        print("error: provide a matrix file or --instances for batch mode", file=sys.stderr)
        return 2
    if args.method not in SELECTOR_NAMES:
        print(f"error: unknown selector {args.method!r}", file=sys.stderr)
        return 2
    A = read_matrix(args.matrix, args.format)
    q = args.q
    notes = []
    if args.method in ("mpspa", "merspa") and q is None:
        q = 10
        notes.append("q defaulted to 10")
        print("note: --q not given, defaulting to q=10", file=sys.stderr)
    idx, timing, sel_notes = bench.run_selector(
        A, args.method, args.k, q, args.eps, args.boundary_tol
    )
    record = {"seed": args.seed, "indices_1based": (np.sort(idx) + 1).tolist(), "timing": timing}
    if args.truth:
        _, truth = _load_truth(args.truth, A)
        record["recovery_rate"] = recovery_rate(idx, truth)
    report = ExperimentReport(
        method=args.method,
        parameters={"d": A.shape[0], "m": A.shape[1], "k": args.k, "q": q,
                    "eps": args.eps, "seed": args.seed,
                    "matrix": os.path.basename(args.matrix)},
        records=[record],
    )
    report.parameters["notes"] = notes + list(sel_notes)
    if args.report:
        write_report(args.report, report)
    print("selected (1-based):", " ".join(str(i) for i in record["indices_1based"]))
    if "recovery_rate" in record:
        print(f"recovery_rate: {record['recovery_rate']:.4f}")


def _select_batch(args):
    if not (args.d and args.m):
        print("error: batch mode needs -d and -m", file=sys.stderr)
        return 2
    methods = _parse_method_spec(args.methods) if args.methods else [("spa", None), ("pspa", None)]
    deltas = _parse_floats(args.deltas)
    if args.delta_unit == "abs":
        # express absolute deltas as per-instance multipliers at worker level
        print("note: absolute deltas are applied as-is per instance", file=sys.stderr)
    rows_all = []
    for i in range(args.instances):
        task_seed = args.seed * 100_003 + i
        if args.delta_unit == "sigmin":
            rows_all.extend(
                bench._fig2_worker((args.d, args.m, args.k, task_seed, tuple(methods),
                                    tuple(deltas), args.eps))
            )
        else:
            from .synth import generate_instance as gen, rescale_noise

            base = gen(args.d, args.m, args.k, 1.0, task_seed)
            for delta in deltas:
                inst = rescale_noise(base, delta)
                for method, q in methods:
                    idx, timing, notes = bench.run_selector(inst.A, method, args.k, q, args.eps)
                    rows_all.append({
                        "delta_mult": delta, "delta": inst.delta, "method": method, "q": q,
                        "recovery_rate": recovery_rate(idx, inst.true_indices),
                        "seed": task_seed, "timing": timing, "notes": list(notes),
                    })
    csv_rows = []
    for t in deltas:
        for method, q in methods:
            sel = [r for r in rows_all
                   if r["delta_mult"] == t and r["method"] == method and r["q"] == q]
            csv_rows.append((
                float(np.mean([r["delta"] for r in sel])),
                method,
                "" if q is None else q,
                float(np.mean([r["recovery_rate"] for r in sel])),
            ))
    out = args.out or "select_batch.csv"
    write_csv_rows(out, ["delta", "method", "q", "mean_recovery"], csv_rows)
    write_json(os.path.splitext(out)[0] + ".json",
               {"shape": [args.d, args.m, args.k], "instances": args.instances,
                "seed": args.seed, "records": rows_all})
    print(f"wrote {out} ({len(csv_rows)} rows)")


def _parse_band_spec(text, d):
    drop = set()
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "-" in tok:
            lo, hi = tok.split("-")
            drop.update(range(int(lo), int(hi) + 1))
        else:
            drop.add(int(tok))
    bad = [b for b in drop if not (1 <= b <= d)]
    if bad:
        raise SepnmfError(f"--drop-bands out of range 1..{d}: {sorted(bad)}")
    return np.asarray(sorted(set(range(1, d + 1)) - drop), dtype=np.int64) - 1


def _read_library(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return [h.strip() for h in header], data


def cmd_unmix(args):
    A = read_matrix(args.matrix, args.format)
    meta_path = args.meta or args.matrix + ".json"
    meta = read_json(meta_path) if os.path.exists(meta_path) else {}
    if args.drop_bands:
        keep = _parse_band_spec(args.drop_bands, A.shape[0])
        A = np.ascontiguousarray(A[keep])
    q = args.q
    if args.method in ("mpspa", "merspa") and q is None:
        q = 10
    idx, timing, notes = bench.run_selector(A, args.method, args.k, q, args.eps)
    order = np.sort(idx)
    F_sel = np.ascontiguousarray(A[:, order])
    ab = estimate_abundances(F_sel, A)

    os.makedirs(args.out, exist_ok=True)
    fmt = args.format or "csv"
    header = [f"endmember_{i + 1}(col={j + 1})" for i, j in enumerate(order)]
    write_csv_rows(os.path.join(args.out, "endmembers.csv"), header, F_sel.tolist())
    write_matrix(os.path.join(args.out, f"abundances.{fmt}"), ab.W, fmt)

    files = ["endmembers.csv", f"abundances.{fmt}"]
    sad_rows = None
    if args.library:
        names, lib = _read_library(args.library)
        if lib.shape[0] != A.shape[0]:
            raise SepnmfError(
                f"library has {lib.shape[0]} bands but the (filtered) cube has {A.shape[0]}"
            )
        sad_rows = []
        for i in range(F_sel.shape[1]):
            sads = [spectral_angle_distance(lib[:, j], F_sel[:, i]) for j in range(lib.shape[1])]
            closest = names[int(np.argmin(sads))]
            sad_rows.append([i + 1] + [float(s) for s in sads] + [closest])
        write_csv_rows(
            os.path.join(args.out, "sad_table.csv"),
            ["endmember"] + names + ["closest"],
            sad_rows,
        )
        files.append("sad_table.csv")

    height, width = meta.get("height"), meta.get("width")
    if height and width:
        if height * width != A.shape[1]:
            raise SepnmfError(f"height*width = {height * width} != {A.shape[1]} pixels")
        for i in range(ab.W.shape[0]):
            name = f"abundance_{i + 1:02d}.pgm"
            write_pgm(os.path.join(args.out, name), ab.W[i].reshape(height, width))
            files.append(name)
    elif args.rasters:
        raise MissingShapeError("rasters requested but sidecar has no height/width")

    write_json(
        os.path.join(args.out, "report.json"),
        {
            "method": args.method,
            "q": q,
            "k": args.k,
            "indices_1based": (order + 1).tolist(),
            "notes": list(notes),
            "files": files,
            "timing": timing,
            "toolkit_version": __version__,
        },
    )
    print("selected (1-based):", " ".join(str(i + 1) for i in order))

    if args.expect_match:
        if args.expect_match not in SELECTOR_NAMES:
            raise SepnmfError(f"unknown --expect-match selector {args.expect_match!r}")
        other_idx, _, _ = bench.run_selector(A, args.expect_match, args.k, None, args.eps)
        if set(order.tolist()) == set(np.asarray(other_idx).tolist()):
            print(f"match: {args.method} and {args.expect_match} select the same set")
            return 0
        print(
            f"mismatch: {args.expect_match} selected "
            + " ".join(str(i + 1) for i in np.sort(other_idx)),
            file=sys.stderr,
        )
        return 3
    return 0


def cmd_bench(args):
    names = ["fig1", "fig2", "tab2"] if args.suite == "all" else [args.suite]
    ok_rows, failures, summary = bench.run_suites(
        names, args.out, scale=args.scale, seed=args.seed, jobs=args.jobs
    )
    print(summary, end="")
    if ok_rows == 0:
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
