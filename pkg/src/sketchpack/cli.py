"""Command-line front end.

Subcommands: gen (spectra and synthetic matrices), approx (one run),
sweep (method/depth grids to long-format CSV), bounds (bound curves to
CSV), verify (Monte Carlo moment checks, coupling and dominance
suites), cluster (kernel spectral clustering).

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.
Every command is deterministic given --seed.  SKETCHPACK_THREADS caps
the sweep fan-out.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from . import approx as approx_mod
from . import cluster as cluster_mod
from . import krylov as krylov_mod
from . import metrics as metrics_mod
from . import nystrom as nystrom_mod
from . import theory as theory_mod
from .approx import (FixedMultiplications, FroTolerance, ResidualTolerance,
                     TerminationCapReached)
from .factor import qr_econ
from .linop import (as_rng, dense_operator, diag_operator, gaussian_matrix,
                    make_spectrum, noisy_dense, read_binary_matrix,
                    read_matrix_market, read_spectrum_csv, write_binary_matrix,
                    write_spectrum_csv)
from .nystrom import NystromUnstable, nystrom_compress

USAGE_ERROR, NUMERICAL_ERROR, IO_ERROR = 2, 3, 4

GENERAL_METHODS = ("rsvd", "rsi", "rbki")
NYSTROM_METHODS = ("nyssvd", "nyssi", "nysbki")


@dataclass
class RunRecord:
    """One algorithm run, with enough recorded to replay it."""

    method: str
    k: int
    m_or_q: int
    seed: int
    stop: str
    matvecs_A: int
    matvecs_At: int
    wall_seconds: float
    error: dict = None
    bounds: list = field(default_factory=list)
    block_widths: list = field(default_factory=list)
    orth: str = "stabilized"
    shift_used: float = None

    def to_json(self):
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _parse_stop(text, fro_norm=None):
    kind, _, rest = text.partition(":")
    if kind == "fixed":
        return FixedMultiplications(int(rest))
    if kind == "fro":
        if fro_norm is None:
            raise ValueError("fro stopping needs an input with a known "
                             "Frobenius norm")
        return FroTolerance(float(rest), fro_norm)
    if kind == "residual":
        r_text, _, eps_text = rest.partition(",")
        return ResidualTolerance(int(r_text), float(eps_text))
    raise ValueError(f"unknown stop rule {text!r} (use fixed:m | fro:eps | "
                     f"residual:r,eps)")


def _load_operator(path):
    """Spectrum CSV -> diagonal operator; .mtx / .bin -> dense operator."""
    path = str(path)
    if path.endswith(".mtx"):
        return dense_operator(read_matrix_market(path)), None
    if path.endswith(".bin"):
        return dense_operator(read_binary_matrix(path)), None
    spec = read_spectrum_csv(path)
    return diag_operator(spec), spec


def _reference_matrix(op):
    if hasattr(op, "dense"):
        return op.dense
    if hasattr(op, "diag"):
        return np.diag(op.diag)
    return None


def _run_method(method, op, k, stop, seed, orth, shift):
    if method == "rsvd":
        return approx_mod.rsvd(op, k, rng=seed, orth=orth)
    if method == "rsi":
        return approx_mod.rsi_extended(op, k, stop, rng=seed, orth=orth)
    if method == "rbki":
        if isinstance(stop, ResidualTolerance):
            return krylov_mod.rbki_adaptive(op, k, stop.r, stop.eps, rng=seed, orth=orth)
        return krylov_mod.rbki_extended(op, k, stop, rng=seed, orth=orth)
    if method == "nyssvd":
        return nystrom_mod.nyssvd(op, k, rng=seed, shift=shift)
    if method == "nyssi":
        return nystrom_mod.nyssi(op, k, stop, rng=seed, shift=shift, orth=orth)
    if method == "nysbki":
        if isinstance(stop, ResidualTolerance):
            return nystrom_mod.nysbki_adaptive(op, k, stop.r, stop.eps, rng=seed,
                                               shift=shift, orth=orth)
        return nystrom_mod.nysbki(op, k, stop, rng=seed, shift=shift, orth=orth)
    raise ValueError(f"unknown method {method!r}")


def _check_method_operator(method, op):
    if method in NYSTROM_METHODS and not op.is_symmetric:
        raise ValueError(f"{method} needs a symmetric psd operator; the input "
                         f"is not symmetric")
    if method in GENERAL_METHODS and not op.has_adjoint:
        raise ValueError(f"{method} needs products with the adjoint")


def cmd_gen(args):
    if args.noise_std is not None:
        spec = make_spectrum(args.kind, args.n)
        dense = noisy_dense(np.diag(spec), args.noise_std, args.seed)
        write_binary_matrix(args.out, dense)
    else:
        write_spectrum_csv(args.out, make_spectrum(args.kind, args.n))
    return 0


def cmd_approx(args):
    op, spec = _load_operator(args.input)
    _check_method_operator(args.method, op)
    stop = _parse_stop(args.stop, fro_norm=op.fro_norm)
    start = time.perf_counter()
    approx = _run_method(args.method, op, args.k, stop, args.seed, args.orth,
                         args.shift)
    wall = time.perf_counter() - start

    error = None
    reference = _reference_matrix(op)
    if reference is not None and max(op.shape) <= args.dense_cap:
        ref_spec = spec if spec is not None else sla.svdvals(reference)
        report = metrics_mod.error_report(reference, approx, spec=ref_spec,
                                          r=args.ref_rank)
        error = report.to_dict()

    record = RunRecord(
        method=args.method, k=args.k,
        m_or_q=approx.info.get("multiplications", 0), seed=args.seed,
        stop=args.stop, matvecs_A=approx.ledger.count_A,
        matvecs_At=approx.ledger.count_At, wall_seconds=wall, error=error,
        block_widths=approx.info.get("block_widths", []),
        orth=approx.info.get("orth", args.orth),
        shift_used=getattr(approx, "shift_used", None))
    text = record.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _parse_grid(text):
    if ":" in text:
        lo, _, hi = text.partition(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x]


def _sweep_one(method, op_factory, k, m_grid, seed, orth, shift, spec, ref_rank):
    """All requested depths for one (method, seed), one pass per run."""
    op = op_factory()
    rows = []
    reference_cols = np.eye(op.rows)[:, :ref_rank] if ref_rank else None

    def finish(m, snap_approx, wall):
        spectral = metrics_mod.spectral_error_estimate(
            op.diag if hasattr(op, "diag") else op.dense, snap_approx)
        frob = _frobenius_error_structured(op, snap_approx)
        rel = spectral / spec[ref_rank] if ref_rank else float("nan")
        sub = (metrics_mod.subspace_error(snap_approx, reference_cols, ref_rank)
               if ref_rank and snap_approx.rank >= ref_rank else float("nan"))
        rows.append({
            "method": method, "k": k, "m": m, "km": m * k, "seed": seed,
            "spectral_error": spectral, "frobenius_error": frob,
            "relative_to_sigma": rel, "subspace_error": sub,
            "matvecs_A": snap_approx.ledger.count_A,
            "matvecs_At": snap_approx.ledger.count_At,
            "wall_seconds": wall})

    start = time.perf_counter()
    if method == "rsvd":
        finish(2, approx_mod.rsvd(op, k, rng=seed, orth=orth),
               time.perf_counter() - start)
        return rows
    if method == "nyssvd":
        finish(1, nystrom_mod.nyssvd(op, k, rng=seed, shift=shift),
               time.perf_counter() - start)
        return rows

    target = max(m_grid)
    wanted = set(m_grid)
    if method == "rsi":
        states = approx_mod._rsi_states(op, k, rng=seed, orth=orth)
    elif method == "rbki":
        states = krylov_mod._rbki_states(op, k, rng=seed, orth=orth)
    elif method in ("nyssi", "nysbki"):
        shift_value, _ = nystrom_mod._resolve_shift(op, k, as_rng(seed), shift)
        if method == "nyssi":
            states = nystrom_mod._nyssi_states(op, k, as_rng(seed), None,
                                               shift_value, orth)
        else:
            states = nystrom_mod._nysbki_states(op, k, as_rng(seed), None,
                                                shift_value, orth)
    else:
        raise ValueError(f"unknown method {method!r}")
    for state in states:
        m, snapshot = state[0], state[-1]
        if m in wanted:
            finish(m, snapshot(), time.perf_counter() - start)
        if m >= target:
            break
    return rows


def _frobenius_error_structured(op, approx):
    """Exact ||A - Ahat||_F from <A, Ahat> without the dense residual."""
    if hasattr(approx, "V"):
        U, s, V = approx.U, approx.S, approx.V
    else:
        U, s, V = approx.U, approx.L, approx.U
    if hasattr(op, "diag"):
        d = op.diag
        cross = float(np.einsum("i,ij,j,ij->", d, U, s, V))
        a_fro_sq = float((d * d).sum())
    else:
        A = op.dense
        cross = float(np.einsum("ij,ij->", A, (U * s) @ V.T))
        a_fro_sq = float((A * A).sum())
    value = a_fro_sq - 2.0 * cross + float((s * s).sum())
    return math.sqrt(max(0.0, value))


def cmd_sweep(args):
    methods = [m for m in args.methods.split(",") if m]
    if not methods:
        raise ValueError("empty method list")
    op_probe, spec = _load_operator(args.input)
    if spec is None:
        raise ValueError("sweep needs a spectrum CSV input")
    for method in methods:
        _check_method_operator(method, op_probe)
    m_grid = _parse_grid(args.m_grid)
    seeds = list(range(args.seeds))
    tasks = [(method, seed) for method in methods for seed in seeds]
    threads = int(os.environ.get("SKETCHPACK_THREADS", "1"))

    def run(task):
        method, seed = task
        return _sweep_one(method, lambda: diag_operator(spec), args.k, m_grid,
                          seed, args.orth, args.shift, spec, args.ref_rank)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    rows = [row for batch in results for row in batch]
    fieldnames = ["method", "k", "m", "km", "seed", "spectral_error",
                  "frobenius_error", "relative_to_sigma", "subspace_error",
                  "matvecs_A", "matvecs_At", "wall_seconds"]
    _write_csv(args.out, fieldnames, rows)
    return 0


def _write_csv(path, fieldnames, rows):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def _best_gap_index(spec, r, k):
    """Scan s over r+1..min(k-1, r+25) for the tightest gapped bound."""
    best_s, best_val = None, np.inf
    for s in range(r + 1, min(k - 1, r + 25) + 1):
        try:
            report = theory_mod.gapped_bound(theory_mod.BoundQuery(
                spec=spec, k=k, r=r, s=s, m=6, method="RBKI", variant="gapped"))
        except theory_mod.BoundInapplicable:
            continue
        if report.value < best_val:
            best_s, best_val = s, report.value
    return best_s


def cmd_bounds(args):
    spec = read_spectrum_csv(args.spectrum)
    methods = [m for m in args.methods.split(",") if m]
    if not methods:
        raise ValueError("empty method list")
    m_grid = _parse_grid(args.m_grid)
    s = args.s if args.s is not None else _best_gap_index(spec, args.r, args.k)
    rows = []
    for method in methods:
        for m in m_grid:
            for variant, fn in (("gapless", theory_mod.gapless_bound),
                                ("gapped", theory_mod.gapped_bound)):
                if method.upper() in ("RSVD", "NYSSVD"):
                    continue
                query = theory_mod.BoundQuery(spec=spec, k=args.k, r=args.r,
                                              s=s, m=m, method=method,
                                              variant=variant)
                try:
                    report = fn(query)
                    rows.append({"method": method, "variant": variant,
                                 "k": args.k, "r": args.r, "s": s, "m": m,
                                 "value": report.value, "label": report.label,
                                 "gap": report.gap, "applicable": True})
                except theory_mod.BoundInapplicable as exc:
                    rows.append({"method": method, "variant": variant,
                                 "k": args.k, "r": args.r, "s": s, "m": m,
                                 "value": float("nan"), "label": str(exc),
                                 "gap": float("nan"), "applicable": False})
        if method.upper() in ("RSVD", "NYSSVD"):
            fn = (theory_mod.rsvd_bound if method.upper() == "RSVD"
                  else theory_mod.nyssvd_bound)
            query = theory_mod.BoundQuery(spec=spec, k=args.k, r=args.r,
                                          method=method, variant="expectation")
            try:
                report = fn(query)
                rows.append({"method": method, "variant": "expectation",
                             "k": args.k, "r": args.r, "s": "", "m": "",
                             "value": report.value, "label": report.label,
                             "gap": "", "applicable": True})
            except theory_mod.BoundInapplicable as exc:
                rows.append({"method": method, "variant": "expectation",
                             "k": args.k, "r": args.r, "s": "", "m": "",
                             "value": float("nan"), "label": str(exc),
                             "gap": "", "applicable": False})
    fieldnames = ["method", "variant", "k", "r", "s", "m", "value", "label",
                  "gap", "applicable"]
    _write_csv(args.out, fieldnames, rows)
    return 0


# ---------------------------------------------------------------------------
# Verification suites driven by cmd_verify (and reused by the test suite).
# ---------------------------------------------------------------------------

DEFAULT_RMT_PARAMS = {
    "frobenius_product": {"S": np.diag([1.0, 2.0]), "T": np.diag([3.0])},
    "schatten4_product": {"S": np.diag([1.0, 2.0]), "T": np.diag([3.0, 1.0])},
    "inverse_trace": {"r": 5, "k": 10},
    "inverse_trace_tail": {"r": 5, "k": 10, "t": math.e ** 2, "u": 8.0},
    "spectral_product": {"r": 5, "k": 10, "dim": 10},
}


def coupling_suite(n=200, k=12, m=4, seeds=range(10), methods=None, tol=1e-8):
    """Check that every algorithm's error depends on the input only
    through its singular values.

    Runs each method on a rotated dense matrix with sketch Omega and on
    the bare spectrum with the rotated sketch; the two spectral errors
    must agree to ``tol`` relative.
    """
    methods = methods or (GENERAL_METHODS + NYSTROM_METHODS)
    spec = make_spectrum("exp25", n)
    results = []
    for seed in seeds:
        rng = as_rng(10_000 + seed)
        U, _ = qr_econ(gaussian_matrix(rng, n, n))
        V, _ = qr_econ(gaussian_matrix(rng, n, n))
        Omega = gaussian_matrix(rng, n, k)
        for method in methods:
            psd = method in NYSTROM_METHODS
            right = U if psd else V
            dense = (U * spec) @ right.T
            op_dense = dense_operator(dense)
            op_diag = diag_operator(spec)
            stop = FixedMultiplications(m if not psd else max(1, m - 1))
            a1 = _run_method_with_omega(method, op_dense, k, stop, Omega)
            a2 = _run_method_with_omega(method, op_diag, k, stop, right.T @ Omega)
            e1 = metrics_mod.schatten_error(dense, a1, np.inf)
            e2 = metrics_mod.schatten_error(np.diag(spec), a2, np.inf)
            scale = max(e1, e2, 1e-300)
            results.append({"method": method, "seed": int(seed),
                            "error_dense": e1, "error_diag": e2,
                            "relative_difference": abs(e1 - e2) / scale,
                            "passed": abs(e1 - e2) <= tol * scale})
    return results


def _run_method_with_omega(method, op, k, stop, omega):
    if method == "rsvd":
        return approx_mod.rsvd(op, k, omega=omega)
    if method == "rsi":
        return approx_mod.rsi_extended(op, k, stop, omega=omega)
    if method == "rbki":
        return krylov_mod.rbki_extended(op, k, stop, omega=omega)
    if method == "nyssvd":
        return nystrom_mod.nyssvd(op, k, omega=omega)
    if method == "nyssi":
        return nystrom_mod.nyssi(op, k, stop, omega=omega)
    if method == "nysbki":
        return nystrom_mod.nysbki(op, k, stop, omega=omega)
    raise ValueError(f"unknown method {method!r}")


def dominance_suite(seeds=range(20), n=300, k=20, m=6, tol_scale=1e-10):
    """Per-seed ordering checks.

    (a) With a shared sketch, the Krylov error never exceeds the
    subspace-iteration error, which never exceeds the single-sketch
    error, in Schatten p for p in {1, 2, inf}.  (b) Nystrom compression
    never loses to the plain projection on random psd matrices.
    """
    spec = make_spectrum("noisy_slow", n)
    results = []
    for seed in seeds:
        rng = as_rng(20_000 + seed)
        omega = gaussian_matrix(rng, n, k)
        op = lambda: diag_operator(spec)
        a_sketch = approx_mod.rsvd(op(), k, omega=omega)
        a_power = approx_mod.rsi_extended(op(), k, FixedMultiplications(m),
                                          omega=omega)
        a_krylov = krylov_mod.rbki_extended(op(), k, FixedMultiplications(m),
                                            omega=omega)
        dense = np.diag(spec)
        tol = tol_scale * spec[0]
        chain_ok = True
        for p in (1, 2, np.inf):
            e_sketch = metrics_mod.schatten_error(dense, a_sketch, p)
            e_power = metrics_mod.schatten_error(dense, a_power, p)
            e_krylov = metrics_mod.schatten_error(dense, a_krylov, p)
            chain_ok &= e_krylov <= e_power + tol and e_power <= e_sketch + tol
        results.append({"check": "projection_chain", "seed": int(seed),
                        "passed": bool(chain_ok)})

        G = gaussian_matrix(rng, 50, 50)
        A = G @ G.T
        M = gaussian_matrix(rng, 50, 10)
        comp = nystrom_compress(dense_operator(A), M)
        X, _ = qr_econ(M)
        proj = X @ (X.T @ A)
        nys_ok = True
        for p in (1, 2, np.inf):
            e_nys = metrics_mod.schatten_norm(
                sla.svdvals(A - comp.dense()), p)
            e_proj = metrics_mod.schatten_norm(sla.svdvals(A - proj), p)
            nys_ok &= e_nys <= e_proj + 1e-9 * np.trace(A)
        results.append({"check": "nystrom_vs_projection", "seed": int(seed),
                        "passed": bool(nys_ok)})
    return results


def cmd_verify(args):
    rng = as_rng(args.seed)
    report = {"targets": {}, "all_passed": True}
    targets = ([t for t in args.targets.split(",") if t] if args.targets
               else list(DEFAULT_RMT_PARAMS))
    for target in targets:
        params = DEFAULT_RMT_PARAMS.get(target, {})
        out = theory_mod.mc_verify_rmt(target, params, args.trials, rng)
        report["targets"][target] = out.to_dict()
        report["all_passed"] &= out.passed
    if args.coupling:
        coupling = coupling_suite(seeds=range(args.coupling_seeds))
        report["coupling"] = coupling
        report["all_passed"] &= all(r["passed"] for r in coupling)
    if args.dominance:
        dominance = dominance_suite(seeds=range(args.dominance_seeds))
        report["dominance"] = dominance
        report["all_passed"] &= all(r["passed"] for r in dominance)
    text = json.dumps(report, indent=2, default=float)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_cluster(args):
    pts = cluster_mod.load_points(args.points)
    truth = None
    if args.truth:
        truth = np.loadtxt(args.truth, dtype=int)
    eig = {"method": "dense" if args.dense_eig else "nysbki_adaptive",
           "k": args.eig_k, "eps": args.eps, "seed": args.seed}
    result = cluster_mod.spectral_cluster(
        pts, args.sigma, args.rank, args.clusters, eig=eig, seed=args.seed,
        row_normalize=args.row_normalize, truth=truth,
        compute_subspace_error=args.subspace_error)
    text = json.dumps(result.to_dict(), indent=2, default=float)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sketchpack")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write synthetic spectra or noisy matrices")
    p.add_argument("--kind", required=True,
                   choices=["exp_step", "exp25", "noisy_slow", "flat"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-std", type=float, default=None,
                   help="write a dense diag+noise matrix instead of a spectrum")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("approx", help="run one approximation")
    p.add_argument("--method", required=True,
                   choices=GENERAL_METHODS + NYSTROM_METHODS)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--stop", default="fixed:2",
                   help="fixed:m | fro:eps | residual:r,eps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--ref-rank", type=int, default=None)
    p.add_argument("--orth", default="stabilized", choices=["stabilized", "plain"])
    p.add_argument("--shift", default="auto")
    p.add_argument("--dense-cap", type=int, default=4000)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("sweep", help="error curves over seeds and depths")
    p.add_argument("--methods", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--m-grid", default="2:8")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--ref-rank", type=int, default=None)
    p.add_argument("--orth", default="stabilized", choices=["stabilized", "plain"])
    p.add_argument("--shift", default="auto")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="bound curves per method and depth")
    p.add_argument("--spectrum", required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--m-grid", default="3:8")
    p.add_argument("--methods", default="rsi,rbki,nyssi,nysbki")
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="Monte Carlo and ordering checks")
    p.add_argument("--targets", default="")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coupling", action="store_true")
    p.add_argument("--coupling-seeds", type=int, default=10)
    p.add_argument("--dominance", action="store_true")
    p.add_argument("--dominance-seeds", type=int, default=20)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cluster", help="kernel spectral clustering")
    p.add_argument("--points", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--eig-k", type=int, default=10)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", default=None)
    p.add_argument("--dense-eig", action="store_true")
    p.add_argument("--row-normalize", action="store_true")
    p.add_argument("--subspace-error", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "shift", None) not in (None, "auto"):
        args.shift = float(args.shift)
    try:
        return args.func(args)
    except (NystromUnstable, TerminationCapReached) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
