"""Orthogonalization and factorization kernels shared by all algorithms.

Everything here is a pure function of its inputs.  ``stabilized_qr`` is
the SVD-thresholded factorization that exposes numerical rank safely;
``block_orthogonalize`` is the twice-repeated block Gram-Schmidt step of
the Krylov iterations.
"""

import numpy as np
import scipy.linalg as sla

__all__ = [
    "FactorizationFailure",
    "qr_econ",
    "stabilized_qr",
    "block_orthogonalize",
    "psd_factor",
    "svd_econ",
    "orth_factor",
]

_EPS = np.finfo(np.float64).eps


class FactorizationFailure(RuntimeError):
    """Cholesky hit a non-positive pivot; callers may retry with a shift."""


def qr_econ(M):
    """Economy QR: Q with orthonormal columns, R upper triangular.

    Exactly rank-deficient input yields a valid but range-ambiguous Q;
    callers that need rank safety use stabilized_qr.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.shape[0] < M.shape[1]:
        raise ValueError(f"qr_econ expects rows >= cols, got {M.shape}")
    if M.shape[1] == 0:
        return M.copy(), np.zeros((0, 0))
    Q, R = sla.qr(M, mode="economic", check_finite=False)
    return Q, R


def stabilized_qr(M, threshold_factor=None, floor=0.0):
    """SVD-thresholded QR substitute: M ~ Q R with rank exposed.

    Computes an economy SVD of M and keeps the singular triplets whose
    singular value exceeds ``threshold_factor * sigma_1`` (default
    factor: max(rows, cols) * machine epsilon) as well as the absolute
    ``floor`` -- callers orthogonalizing against a basis pass the
    original block's scale there, so a remainder made of pure rounding
    noise deflates to nothing.  Q holds the kept left vectors; R stacks
    the rows (sigma_i v_i)*, so R is not triangular.  Q may have fewer
    columns than M; M = 0 yields a valid Q with zero columns.
    """
    M = np.asarray(M, dtype=np.float64)
    if threshold_factor is None:
        threshold_factor = max(M.shape) * _EPS if min(M.shape) else _EPS
    elif threshold_factor <= 0.0:
        raise ValueError("threshold_factor must be > 0")
    if M.shape[1] == 0:
        return M.copy(), np.zeros((0, 0))
    U, s, Vt = sla.svd(M, full_matrices=False, check_finite=False)
    if s.size == 0 or s[0] == 0.0:
        keep = np.zeros(s.size, dtype=bool)
    else:
        keep = s > max(threshold_factor * s[0], floor)
    Q = U[:, keep]
    R = s[keep, None] * Vt[keep]
    return Q, R


def orth_factor(M, orth="stabilized", threshold_factor=None):
    """Dispatch to qr_econ or stabilized_qr by the per-run flag."""
    if orth == "stabilized":
        return stabilized_qr(M, threshold_factor)
    if orth == "plain":
        return qr_econ(M)
    raise ValueError(f"unknown orthogonalization mode {orth!r}")


def block_orthogonalize(X_new, basis, orth="stabilized"):
    """Orthogonalize a block against earlier orthonormal blocks, twice.

    Subtracts the projections onto every block in ``basis`` two times
    (the repetition is what keeps ill-conditioned blocks stable), then
    factors the remainder with qr_econ or stabilized_qr.

    Returns
    -------
    Q : remainder basis, orthonormal columns (possibly fewer than X_new)
    R : the factor of the deflated remainder from the final QR
    coeffs : first-pass projection coefficients, stacked over basis
        blocks -- these are the accumulator columns of the extended
        Krylov iterations; second-pass corrections are discarded.
    """
    X = np.array(X_new, dtype=np.float64, copy=True)
    if not basis:
        Q, R = orth_factor(X, orth)
        return Q, R, np.zeros((0, X.shape[1]))
    scale = float(np.linalg.norm(X))
    coeffs = np.vstack([B.T @ X for B in basis])
    offset = 0
    for B in basis:
        X -= B @ coeffs[offset:offset + B.shape[1]]
        offset += B.shape[1]
    for B in basis:
        X -= B @ (B.T @ X)
    if orth == "stabilized":
        Q, R = stabilized_qr(X, floor=max(X.shape) * _EPS * scale)
    else:
        Q, R = orth_factor(X, orth)
    return Q, R, coeffs


def psd_factor(S):
    """Upper-triangular C with C* C = sym(S).

    S must be square and symmetric to within 1e-10 relative; it is
    symmetrized before factoring.  A non-positive pivot raises
    FactorizationFailure, which signals Nystrom callers to increase
    their shift and retry.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"psd_factor expects a square matrix, got {S.shape}")
    if S.shape[0] == 0:
        return np.zeros((0, 0))
    scale = float(np.abs(S).max(initial=0.0))
    if scale > 0.0 and float(np.abs(S - S.T).max()) > 1e-10 * scale:
        raise ValueError("psd_factor input is not symmetric within 1e-10 relative")
    sym = 0.5 * (S + S.T)
    try:
        return sla.cholesky(sym, lower=False, check_finite=False)
    except sla.LinAlgError as exc:
        raise FactorizationFailure(str(exc)) from exc


def svd_econ(M):
    """Economy SVD returning (U, s, V) with M = U @ diag(s) @ V.T.

    V has orthonormal columns (the transpose of numpy's Vh), which is
    the form every algorithm here consumes.
    """
    M = np.asarray(M, dtype=np.float64)
    if min(M.shape) == 0:
        return (np.zeros((M.shape[0], 0)), np.zeros(0), np.zeros((M.shape[1], 0)))
    U, s, Vt = sla.svd(M, full_matrices=False, check_finite=False)
    return U, s, Vt.T
