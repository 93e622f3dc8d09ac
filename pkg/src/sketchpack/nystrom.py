"""Nystrom-based approximations for positive-semidefinite matrices.

All of these compress a psd operator through A<M> = (AM)(M*AM)^+(AM)*,
which needs products with A only (no adjoint) and always improves on
the plain projection of A onto range(M).  A small shift stabilizes the
Cholesky factorization of M*AM; on a failed factorization the shift is
doubled and the compression retried without any new block products.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .approx import (FixedMultiplications, FroTolerance, ResidualTolerance,
                     TerminationCapReached, _fro_stop_met, _sketch, default_cap)
from .factor import FactorizationFailure, block_orthogonalize, orth_factor, psd_factor, svd_econ
from .linop import as_rng, gaussian_matrix

__all__ = [
    "EigApprox",
    "NystromUnstable",
    "nystrom_compress",
    "nyssvd",
    "nyssi",
    "nysbki",
    "nysbki_adaptive",
]

_EPS = np.finfo(np.float64).eps
_MAX_RETRIES = 5


@dataclass
class EigApprox:
    """Factorized psd approximation A ~ U @ diag(L) @ U.T."""

    U: np.ndarray
    L: np.ndarray
    shift_used: float = 0.0
    ledger: object = None
    info: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.L.size

    def dense(self):
        return (self.U * self.L) @ self.U.T

    def validate(self, tol=1e-10):
        if self.U.shape[1]:
            gram = self.U.T @ self.U
            assert np.abs(gram - np.eye(self.U.shape[1])).max() <= tol
        assert np.all(self.L >= 0.0)
        assert np.all(np.diff(self.L) <= tol * max(1.0, self.L[0] if self.L.size else 1.0))
        return True


class NystromUnstable(RuntimeError):
    """Shift-doubling retries exhausted without a positive factorization."""


def _check_psd_operator(op):
    if op.rows != op.cols:
        raise ValueError("Nystrom approximation needs a square operator")
    if not op.is_symmetric:
        raise ValueError("Nystrom approximation needs a symmetric psd operator")


def _next_shift(shift, gram_trace):
    if shift > 0.0:
        return 2.0 * shift
    return _EPS * max(abs(gram_trace), np.finfo(np.float64).tiny)


def _compress_products(M, AM, shift):
    """Eigendecomposition of A<M> from stored products, with shift retry.

    Given M and the raw products AM, factors M*(A + shift I)M, solves the
    triangular system Z = (AM + shift M) C^{-1}, and removes the shift
    from the squared singular values: L = max(0, sigma^2 - shift).
    Returns (U, L, shift_used).  Retries double the shift up to 5 times;
    no block products are consumed here.
    """
    base = M.T @ AM
    gram_trace = float(np.trace(base))
    mtm = M.T @ M
    shift_used = float(shift)
    for _ in range(_MAX_RETRIES + 1):
        G = 0.5 * (base + base.T) + shift_used * mtm
        try:
            C = psd_factor(G)
            break
        except FactorizationFailure:
            shift_used = _next_shift(shift_used, gram_trace)
    else:
        raise NystromUnstable(
            f"Cholesky failed after {_MAX_RETRIES} shift-doubling retries")
    Y = AM + shift_used * M
    Z = sla.solve_triangular(C, Y.T, trans="T", lower=False, check_finite=False).T
    U, svals, _ = svd_econ(Z)
    L = np.maximum(0.0, svals ** 2 - shift_used)
    return U, L, shift_used


def _compress_gram(M, AM, gram, shift):
    """Compression through an orthonormal M whose Gram M* AM is in hand.

    The shift enters as shift * I because M has orthonormal columns.
    Retries double the shift in place, never touching the products.
    """
    ident = np.eye(gram.shape[0])
    gram_trace = float(np.trace(gram))
    shift_used = float(shift)
    for _ in range(_MAX_RETRIES + 1):
        G = 0.5 * (gram + gram.T) + shift_used * ident
        try:
            C = psd_factor(G)
            break
        except FactorizationFailure:
            shift_used = _next_shift(shift_used, gram_trace)
    else:
        raise NystromUnstable(
            f"Cholesky failed after {_MAX_RETRIES} shift-doubling retries")
    Y = AM + shift_used * M
    Z = sla.solve_triangular(C, Y.T, trans="T", lower=False, check_finite=False).T
    U, svals, _ = svd_econ(Z)
    L = np.maximum(0.0, svals ** 2 - shift_used)
    return U, L, shift_used


def nystrom_compress(op_psd, M, shift=0.0):
    """Nystrom compression of a psd operator through a test matrix M.

    Uses one product of width M.shape[1]; retries after a factorization
    failure reuse that product with a doubled shift.
    """
    _check_psd_operator(op_psd)
    if shift < 0.0:
        raise ValueError("shift must be >= 0")
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    AM = op_psd.apply(M)
    U, L, shift_used = _compress_products(M, AM, shift)
    return EigApprox(U, L, shift_used, op_psd.ledger.snapshot(),
                     info={"method": "nystrom_compress"})


def _resolve_shift(op, k, rng, shift, probes=10):
    """Machine-precision shift eps_mach * tr(A).

    The trace comes from the operator when it is known analytically;
    otherwise from `probes` Gaussian quadratic-form samples, which are
    charged to the ledger like any other block product.
    """
    if shift != "auto":
        if shift < 0.0:
            raise ValueError("shift must be >= 0")
        return float(shift), 0
    if op.trace is not None:
        return _EPS * abs(float(op.trace)), 0
    Z = gaussian_matrix(as_rng(rng), op.cols, probes)
    AZ = op.apply(Z)
    trace_est = float(np.mean(np.sum(Z * AZ, axis=0)))
    return _EPS * abs(trace_est), probes


def nyssvd(op, k, rng=None, omega=None, shift="auto"):
    """Single-multiplication Nystrom approximation from a Gaussian sketch.

    One product of width k (plus trace probes when the shift is
    automatic and the trace is not known analytically); the adjoint is
    never used.
    """
    _check_psd_operator(op)
    if k < 1:
        raise ValueError("nyssvd needs k >= 1")
    rng = as_rng(rng)
    shift_value, probes = _resolve_shift(op, k, rng, shift)
    Omega = _sketch(op, k, rng, omega)
    AM = op.apply(Omega)
    U, L, shift_used = _compress_products(Omega, AM, shift_value)
    return EigApprox(U, L, shift_used, op.ledger.snapshot(),
                     info={"method": "nyssvd", "multiplications": 1,
                           "trace_probes": probes, "block_widths": [k]})


def _nyssi_states(op, k, rng, omega, shift_value, orth):
    """Power iteration states: one product per state, compression lazy.

    Yields (m, info, snapshot); info carries the test matrix and its raw
    product so sweeps can evaluate the compression without a snapshot.
    """
    Y = _sketch(op, k, rng, omega)
    m = 0
    while True:
        X, _ = orth_factor(Y, orth)
        Y = op.apply(X)
        m += 1

        def snapshot(X=X, Y=Y, m=m):
            U, L, shift_used = _compress_products(X, Y, shift_value)
            return EigApprox(U, L, shift_used, op.ledger.snapshot(),
                             info={"method": "nyssi", "orth": orth,
                                   "multiplications": m,
                                   "block_widths": [X.shape[1]]})

        yield m, {"M": X, "AM": Y, "shift": shift_value}, snapshot


def nyssi(op, k, stop, rng=None, omega=None, shift="auto", orth="stabilized", cap=None):
    """Nystrom subspace iteration: orthogonalize, multiply, compress.

    FixedMultiplications(1) spans the same space as nyssvd (the sketch
    is orthonormalized before the single product, which leaves its
    range unchanged).
    """
    _check_psd_operator(op)
    if k < 1:
        raise ValueError("nyssi needs k >= 1")
    rng = as_rng(rng)
    if isinstance(stop, ResidualTolerance):
        raise ValueError("residual stopping needs nysbki_adaptive")
    if cap is None:
        cap = default_cap(op, k)
    shift_value, probes = _resolve_shift(op, k, rng, shift)
    for m, _info, snapshot in _nyssi_states(op, k, rng, omega, shift_value, orth):
        if isinstance(stop, FixedMultiplications):
            if m >= stop.m:
                out = snapshot()
                break
        elif isinstance(stop, FroTolerance):
            out = snapshot()
            if _fro_stop_met(stop, float((out.L ** 2).sum())):
                break
            if m >= cap:
                raise TerminationCapReached(
                    f"Frobenius tolerance unreached after {m} multiplications",
                    approx=out)
        else:
            raise TypeError(f"unsupported stop rule {stop!r}")
    out.info["trace_probes"] = probes
    return out


def _nysbki_states(op, k, rng, omega, shift_value, orth):
    """Krylov states for the psd iteration: every product joins the basis.

    Yields (m, info, snapshot).  The Gram matrix M* (A M) is grown one
    block row/column at a time and shared through info together with
    the basis and raw product blocks, so both the snapshots and any
    sweep-time error evaluation reuse it instead of recomputing an
    O(n (mk)^2) product per state.
    """
    Y_cur = _sketch(op, k, rng, omega)
    X_blocks, AX_blocks, widths = [], [], []
    gram = np.zeros((0, 0))
    m = 0
    while True:
        X_new, _, _ = block_orthogonalize(Y_cur, X_blocks, orth)
        if X_new.shape[1] == 0:
            return  # basis saturated; the previous state is final
        AX = op.apply(X_new)
        if X_blocks:
            M_old = np.hstack(X_blocks)
            AM_old = np.hstack(AX_blocks)
            gram = np.block([[gram, M_old.T @ AX],
                             [X_new.T @ AM_old, X_new.T @ AX]])
        else:
            gram = X_new.T @ AX
        X_blocks.append(X_new)
        widths.append(X_new.shape[1])
        AX_blocks.append(AX)
        Y_cur = AX + shift_value * X_new
        m += 1

        def snapshot(m=m, blocks=tuple(X_blocks), products=tuple(AX_blocks),
                     gram=gram):
            M = np.hstack(blocks)
            AM = np.hstack(products)
            U, L, shift_used = _compress_gram(M, AM, gram, shift_value)
            return EigApprox(U, L, shift_used, op.ledger.snapshot(),
                             info={"method": "nysbki", "orth": orth,
                                   "multiplications": m,
                                   "block_widths": list(widths)})

        yield m, {"M_blocks": tuple(X_blocks), "AM_blocks": tuple(AX_blocks),
                  "gram": gram, "shift": shift_value}, snapshot


def nysbki(op, k, stop, rng=None, omega=None, shift="auto", orth="stabilized", cap=None):
    """Nystrom block Krylov iteration.

    The compression space is span[Omega, A Omega, ..., A^{m-1} Omega]:
    the output of every multiplication joins the basis.  m = 1 spans
    the same space as nyssvd.
    """
    _check_psd_operator(op)
    if k < 1:
        raise ValueError("nysbki needs k >= 1")
    rng = as_rng(rng)
    if isinstance(stop, ResidualTolerance):
        return nysbki_adaptive(op, k, stop.r, stop.eps, rng=rng, omega=omega,
                               shift=shift, orth=orth, cap=cap)
    if cap is None:
        cap = default_cap(op, k)
    shift_value, probes = _resolve_shift(op, k, rng, shift)
    out = None
    for m, _info, snapshot in _nysbki_states(op, k, rng, omega, shift_value, orth):
        if isinstance(stop, FixedMultiplications):
            if m >= stop.m:
                out = snapshot()
                break
        elif isinstance(stop, FroTolerance):
            out = snapshot()
            if _fro_stop_met(stop, float((out.L ** 2).sum())):
                break
            if m >= cap:
                raise TerminationCapReached(
                    f"Frobenius tolerance unreached after {m} multiplications",
                    approx=out)
        else:
            raise TypeError(f"unsupported stop rule {stop!r}")
    else:
        if isinstance(stop, FroTolerance):
            raise TerminationCapReached("basis saturated before the Frobenius "
                                        "tolerance was reached", approx=out)
        if out is None:
            raise NystromUnstable("sketch deflated to zero columns")
    out.info["trace_probes"] = probes
    return out


def nysbki_adaptive(op, k, r, eps, rng=None, omega=None, shift="auto",
                    orth="stabilized", cap=None):
    """Nystrom block Krylov iteration with per-eigenpair residual stopping.

    Tracks E = A U - U L through stored raw products (the columns are
    the eigenpair residuals of the current compression) and stops once
    sqrt(2) * ||E_i|| <= eps for i = 1..r -- for a symmetric
    approximation the left and right singular vectors coincide, so the
    full backward-error residual of pair i is sqrt(2) times the
    one-sided norm.  A run stopping at depth m has spent m + 1 block
    products; the look-ahead product seeds the next step.
    """
    _check_psd_operator(op)
    if k < 1 or r < 1 or eps <= 0:
        raise ValueError("nysbki_adaptive needs k, r >= 1 and eps > 0")
    rng = as_rng(rng)
    if cap is None:
        cap = default_cap(op, k)
    shift_value, probes = _resolve_shift(op, k, rng, shift)

    Omega = _sketch(op, k, rng, omega)
    X0, _ = orth_factor(Omega, orth)
    if X0.shape[1] == 0:
        raise NystromUnstable("sketch deflated to zero columns")
    X_blocks = [X0]
    widths = [X0.shape[1]]
    Y_raw = [op.apply(X0)]          # Y_{j+1} = A X_j, shift-free
    S_raw = np.zeros((X0.shape[1], 0))  # A [X_0 ...] = [X_0 ... X_i] S_raw
    m = 1
    resid = None
    saturated = False

    def compress(total_prev):
        """Factor the current coefficients, retrying the shift in place."""
        G_raw = S_raw[:total_prev, :]
        embed = np.vstack([np.eye(total_prev),
                           np.zeros((S_raw.shape[0] - total_prev, total_prev))])
        shift_used = shift_value
        for _ in range(_MAX_RETRIES + 1):
            G = 0.5 * (G_raw + G_raw.T) + shift_used * np.eye(total_prev)
            try:
                C = psd_factor(G)
                break
            except FactorizationFailure:
                shift_used = _next_shift(shift_used, float(np.trace(G_raw)))
        else:
            raise NystromUnstable(
                f"Cholesky failed after {_MAX_RETRIES} shift-doubling retries")
        Z = sla.solve_triangular(C, (S_raw + shift_used * embed).T,
                                 trans="T", lower=False, check_finite=False).T
        Uhat, svals, _ = svd_econ(Z)
        L = np.maximum(0.0, svals ** 2 - shift_used)
        return Uhat, L, shift_used

    def build(Uhat, L, shift_used, depth, products):
        return EigApprox(np.hstack(X_blocks) @ Uhat, L, shift_used,
                         op.ledger.snapshot(),
                         info={"method": "nysbki_adaptive", "orth": orth,
                               "multiplications": depth, "products_total": products,
                               "trace_probes": probes,
                               "block_widths": list(widths),
                               "residuals": None if resid is None else list(resid),
                               "saturated": saturated})

    while True:
        total_prev = sum(widths)
        X_shifted = Y_raw[-1] + shift_value * X_blocks[-1]
        X_new, R_ii, coef = block_orthogonalize(X_shifted, X_blocks, orth)
        # Shift-free coefficient column: (A + s)X_last minus s at X_last's slot.
        col_shifted = np.vstack([coef, R_ii])
        col_raw = col_shifted.copy()
        w_last = X_blocks[-1].shape[1]
        col_raw[total_prev - w_last:total_prev, :] -= shift_value * np.eye(w_last)
        S_raw = np.vstack([S_raw, np.zeros((X_new.shape[1], S_raw.shape[1]))])
        S_raw = np.hstack([S_raw, col_raw])
        saturated = X_new.shape[1] == 0
        if saturated:
            Uhat, L, shift_used = compress(total_prev)
            return build(Uhat, L, shift_used, depth=m, products=m)  # no new product
        X_blocks.append(X_new)
        widths.append(X_new.shape[1])
        Uhat, L, shift_used = compress(total_prev)
        Y_raw.append(op.apply(X_new))
        m += 1
        U = np.hstack(X_blocks) @ Uhat
        E = np.hstack(Y_raw) @ Uhat - U * L
        resid = np.sqrt(2.0) * np.linalg.norm(E, axis=0)
        if resid.size >= r and np.all(resid[:r] <= eps):
            return build(Uhat, L, shift_used, depth=m - 1, products=m)
        if m > cap:
            raise TerminationCapReached(
                f"residual tolerance unreached after {m} products",
                approx=build(Uhat, L, shift_used, depth=m - 1, products=m),
                residuals=resid)