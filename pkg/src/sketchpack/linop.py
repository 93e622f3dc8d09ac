"""Operators, sketches, synthetic spectra, and matvec accounting.

Matrices are plain float64 ndarrays.  A LinearOperator wraps a pair of
block-product callables (with A and with A*) and charges every product
to a MatvecLedger, which is the cost model used throughout: the total
number of matrix-vector products of a run is ``count_A + count_At``.
"""

import json
import threading

import numpy as np

__all__ = [
    "MatvecLedger",
    "LinearOperator",
    "AdjointUnavailable",
    "gaussian_matrix",
    "diag_operator",
    "dense_operator",
    "make_spectrum",
    "noisy_dense",
    "ledger_snapshot",
    "as_rng",
    "read_matrix_market",
    "read_binary_matrix",
    "write_binary_matrix",
    "read_spectrum_csv",
    "write_spectrum_csv",
]


class AdjointUnavailable(RuntimeError):
    """Raised when an algorithm needs A* but the operator only has A."""


class MatvecLedger:
    """Running count of block products with A and with A*.

    Counts increase by the block width on every product and never
    decrease.  Increments are lock-protected so concurrent block
    products on one operator stay exact.
    """

    def __init__(self, count_A=0, count_At=0):
        self.count_A = int(count_A)
        self.count_At = int(count_At)
        self._lock = threading.Lock()

    def charge_A(self, width):
        with self._lock:
            self.count_A += int(width)

    def charge_At(self, width):
        with self._lock:
            self.count_At += int(width)

    @property
    def total(self):
        return self.count_A + self.count_At

    def snapshot(self):
        return MatvecLedger(self.count_A, self.count_At)

    def to_dict(self):
        return {"matvecs_A": self.count_A, "matvecs_At": self.count_At}

    def __repr__(self):
        return f"MatvecLedger(count_A={self.count_A}, count_At={self.count_At})"

    def __eq__(self, other):
        if not isinstance(other, MatvecLedger):
            return NotImplemented
        return (self.count_A, self.count_At) == (other.count_A, other.count_At)


class LinearOperator:
    """A matrix accessed only through block products, with a ledger.

    Parameters
    ----------
    shape : (rows, cols)
    matmat : callable
        Maps a (cols, w) block to A @ block, shape (rows, w).
    rmatmat : callable or None
        Maps a (rows, w) block to A* @ block.  None means the adjoint
        is unavailable; algorithms that need it must refuse.
    trace : float, optional
        Analytic trace when known (square operators); used for
        automatic Nystrom shifts instead of stochastic probes.
    fro_norm : float, optional
        Analytic Frobenius norm when known; used by Frobenius stopping.
    is_symmetric : bool
        Marks operators that are symmetric by construction (Nystrom
        algorithms require this).
    """

    def __init__(self, shape, matmat, rmatmat=None, trace=None, fro_norm=None,
                 is_symmetric=False):
        self.rows, self.cols = (int(shape[0]), int(shape[1]))
        self._matmat = matmat
        self._rmatmat = rmatmat
        self.trace = trace
        self.fro_norm = fro_norm
        self.is_symmetric = bool(is_symmetric)
        self.ledger = MatvecLedger()

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def has_adjoint(self):
        return self._rmatmat is not None

    def apply(self, block):
        block = np.atleast_2d(np.asarray(block, dtype=np.float64))
        if block.shape[0] != self.cols:
            raise ValueError(
                f"block has {block.shape[0]} rows, operator expects {self.cols}")
        self.ledger.charge_A(block.shape[1])
        return self._matmat(block)

    def apply_adjoint(self, block):
        if self._rmatmat is None:
            raise AdjointUnavailable("operator does not expose products with A*")
        block = np.atleast_2d(np.asarray(block, dtype=np.float64))
        if block.shape[0] != self.rows:
            raise ValueError(
                f"block has {block.shape[0]} rows, adjoint expects {self.rows}")
        self.ledger.charge_At(block.shape[1])
        return self._rmatmat(block)


def as_rng(rng):
    """Normalize a seed or Generator to a numpy Generator.

    The generator identity is numpy's default PCG64; identical seeds
    with identical draw sequences reproduce outputs exactly within this
    implementation.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def gaussian_matrix(rng, rows, cols):
    """Draw a rows-by-cols matrix of iid standard normal entries."""
    if rows < 1 or cols < 1:
        raise ValueError("gaussian_matrix needs rows, cols >= 1")
    return as_rng(rng).standard_normal((rows, cols))


def diag_operator(values):
    """Square operator multiplying blocks elementwise by a diagonal.

    ``values`` is typically a synthetic spectrum; the operator then has
    exactly those singular values, with analytic trace and Frobenius
    norm attached.  Self-adjoint, so apply_adjoint equals apply.
    """
    d = np.asarray(values, dtype=np.float64).ravel()
    if d.size == 0:
        raise ValueError("diag_operator needs a nonempty diagonal")
    col = d[:, None]

    def matmat(block):
        return col * block

    op = LinearOperator((d.size, d.size), matmat, matmat,
                        trace=float(d.sum()),
                        fro_norm=float(np.sqrt((d * d).sum())),
                        is_symmetric=True)
    op.diag = d
    return op


def dense_operator(M):
    """Wrap a dense matrix as a ledgered operator."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("dense_operator expects a 2-D array")
    symmetric = (M.shape[0] == M.shape[1]
                 and np.allclose(M, M.T, rtol=0.0,
                                 atol=1e-12 * max(1.0, float(np.abs(M).max(initial=0.0)))))
    op = LinearOperator(
        M.shape,
        lambda block: M @ block,
        lambda block: M.T @ block,
        trace=float(np.trace(M)) if M.shape[0] == M.shape[1] else None,
        fro_norm=float(np.linalg.norm(M)),
        is_symmetric=symmetric,
    )
    op.dense = M
    return op


def ledger_snapshot(op):
    """Copy of the operator's current matvec counts."""
    return op.ledger.snapshot()


def make_spectrum(kind, n, params=None):
    """Build a nonincreasing, nonnegative singular-value vector.

    Kinds
    -----
    exp_step   : 1, e^{-0.1}, e^{-0.2}, ...           (fast decay)
    exp25      : e^{-1/25}, e^{-2/25}, ...            (fast decay)
    noisy_slow : max(e^{-i/25}, (1 - i/n)/25), i=1..n (slow noise tail;
                 the linear branch is rescaled so it reaches zero at i=n)
    flat       : all ones
    custom     : params["values"], validated
    """
    if n < 1:
        raise ValueError("spectrum length must be >= 1")
    params = params or {}
    i = np.arange(1, n + 1, dtype=np.float64)
    if kind == "exp_step":
        values = np.exp(-0.1 * (i - 1.0))
    elif kind == "exp25":
        values = np.exp(-i / 25.0)
    elif kind == "noisy_slow":
        values = np.maximum(np.exp(-i / 25.0), (1.0 - i / n) / 25.0)
    elif kind == "flat":
        values = np.ones(n)
    elif kind == "custom":
        values = np.asarray(params["values"], dtype=np.float64).ravel()
        if values.size != n:
            raise ValueError(f"custom spectrum has length {values.size}, expected {n}")
        if np.any(values < 0.0):
            raise ValueError("custom spectrum has negative entries")
        if np.any(np.diff(values) > 0.0):
            raise ValueError("custom spectrum is not nonincreasing")
    else:
        raise ValueError(f"unknown spectrum kind {kind!r}")
    return values


def noisy_dense(base, noise_std, rng):
    """Entrywise base + noise_std * standard normal noise."""
    base = np.asarray(base, dtype=np.float64)
    if noise_std < 0.0:
        raise ValueError("noise_std must be >= 0")
    if noise_std == 0.0:
        return base.copy()
    return base + noise_std * as_rng(rng).standard_normal(base.shape)


# ---------------------------------------------------------------------------
# File formats: Matrix Market, raw binary + JSON sidecar, spectrum CSV.
# ---------------------------------------------------------------------------

def read_matrix_market(path):
    """Read a Matrix Market file (array or coordinate) as a dense array."""
    from scipy.io import mmread

    M = mmread(str(path))
    if hasattr(M, "toarray"):
        M = M.toarray()
    return np.asarray(M, dtype=np.float64)


def _sidecar_path(path):
    return str(path) + ".json"


def write_binary_matrix(path, M):
    """Write raw little-endian float64, column-major, plus a JSON sidecar."""
    M = np.asarray(M, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(np.asfortranarray(M).astype("<f8").tobytes(order="F"))
    with open(_sidecar_path(path), "w") as fh:
        json.dump({"rows": M.shape[0], "cols": M.shape[1], "layout": "col-major"}, fh)
        fh.write("\n")


def read_binary_matrix(path):
    """Read a matrix written by write_binary_matrix."""
    with open(_sidecar_path(path)) as fh:
        header = json.load(fh)
    if header.get("layout") != "col-major":
        raise ValueError(f"unsupported layout {header.get('layout')!r}")
    rows, cols = int(header["rows"]), int(header["cols"])
    data = np.fromfile(str(path), dtype="<f8")
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {data.size}")
    return np.asarray(data.reshape((rows, cols), order="F"), dtype=np.float64)


def write_spectrum_csv(path, values):
    """One value per line, printed so the round trip is exact."""
    values = np.asarray(values, dtype=np.float64).ravel()
    np.savetxt(str(path), values, fmt="%.17g")


def read_spectrum_csv(path):
    values = np.atleast_1d(np.loadtxt(str(path), dtype=np.float64))
    if np.any(np.diff(values) > 0.0) or np.any(values < 0.0):
        raise ValueError(f"{path}: not a nonincreasing nonnegative spectrum")
    return values
