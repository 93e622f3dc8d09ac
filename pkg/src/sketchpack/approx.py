"""Single-sketch and subspace-iteration approximations.

``rsvd`` compresses A into the range of one sketch A @ Omega.
``rsi_simple`` repeats the multiply-orthogonalize cycle a fixed number
of times; ``rsi_extended`` tracks a small core matrix T so it can stop
after any number of multiplications (odd or even) under a StopRule.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .factor import orth_factor, qr_econ, svd_econ
from .linop import as_rng, gaussian_matrix

__all__ = [
    "SVDApprox",
    "FixedMultiplications",
    "FroTolerance",
    "ResidualTolerance",
    "TerminationCapReached",
    "default_cap",
    "rsvd",
    "rsi_simple",
    "rsi_extended",
]


@dataclass
class SVDApprox:
    """Factorized approximation A ~ U @ diag(S) @ V.T with run metadata."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    ledger: object = None
    info: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.S.size

    def dense(self):
        return (self.U * self.S) @ self.V.T

    def validate(self, tol=1e-10):
        """Check orthonormal factors and a nonincreasing value vector."""
        for Q in (self.U, self.V):
            if Q.shape[1]:
                gram = Q.T @ Q
                assert np.abs(gram - np.eye(Q.shape[1])).max() <= tol
        assert np.all(np.diff(self.S) <= tol * max(1.0, self.S[0] if self.S.size else 1.0))
        assert self.rank <= min(self.U.shape[0], self.V.shape[0])
        return True


@dataclass(frozen=True)
class FixedMultiplications:
    """Stop after exactly m block multiplications (counting every product)."""
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("FixedMultiplications needs m >= 1")


@dataclass(frozen=True)
class FroTolerance:
    """Stop once ||A||_F^2 - ||Ahat||_F^2 < eps^2 * ||A||_F^2.

    ``fro_norm`` is ||A||_F and must be supplied (entrywise inputs
    compute it on load; diagonal operators know it analytically).
    """
    eps: float
    fro_norm: float

    def __post_init__(self):
        if self.eps <= 0.0 or self.fro_norm <= 0.0:
            raise ValueError("FroTolerance needs eps > 0 and fro_norm > 0")


@dataclass(frozen=True)
class ResidualTolerance:
    """Stop once the first r singular-triplet residuals are all <= eps."""
    r: int
    eps: float

    def __post_init__(self):
        if self.r < 1 or self.eps <= 0.0:
            raise ValueError("ResidualTolerance needs r >= 1 and eps > 0")


class TerminationCapReached(RuntimeError):
    """Stopping tolerance unreachable before the iteration cap.

    Carries the best approximation built so far in ``.approx`` (and the
    last residual column norms in ``.residuals`` for adaptive runs).
    """

    def __init__(self, message, approx=None, residuals=None):
        super().__init__(message)
        self.approx = approx
        self.residuals = residuals


def default_cap(op, k):
    """Largest useful depth: m with m*k <= min(rows, cols) + 2k."""
    return min(op.rows, op.cols) // int(k) + 2


def _fro_stop_met(stop, approx_fro_sq):
    fro2 = stop.fro_norm ** 2
    return fro2 - approx_fro_sq < stop.eps ** 2 * fro2


def _sketch(op, k, rng, omega):
    if omega is not None:
        omega = np.asarray(omega, dtype=np.float64)
        if omega.shape != (op.cols, k):
            raise ValueError(f"omega has shape {omega.shape}, expected {(op.cols, k)}")
        return omega
    return gaussian_matrix(as_rng(rng), op.cols, k)


def rsvd(op, k, rng=None, omega=None, orth="stabilized"):
    """Randomized SVD: project A onto the range of one sketch A @ Omega.

    Exactly one product with A and one with A* at block width k.  With
    stabilized orthogonalization a rank-deficient sketch yields an
    approximation of the true, smaller rank rather than an error.
    """
    if not (1 <= k <= min(op.rows, op.cols)):
        raise ValueError(f"k={k} outside 1..min(shape)={min(op.rows, op.cols)}")
    if not op.has_adjoint:
        raise ValueError("rsvd needs products with A*; operator has none")
    Omega = _sketch(op, k, rng, omega)
    X, _ = orth_factor(op.apply(Omega), orth)
    Y = op.apply_adjoint(X)
    Uhat, S, V = svd_econ(Y.T)
    return SVDApprox(X @ Uhat, S, V, op.ledger.snapshot(),
                     info={"method": "rsvd", "orth": orth, "multiplications": 2,
                           "block_widths": [X.shape[1]]})


def rsi_simple(op, k, q, rng=None, omega=None, orth="stabilized"):
    """Subspace iteration, fixed depth: q products with A and q with A*.

    q = 1 coincides with rsvd (the computation path is identical).
    """
    if k < 1 or q < 1:
        raise ValueError("rsi_simple needs k, q >= 1")
    if not op.has_adjoint:
        raise ValueError("rsi_simple needs products with A*; operator has none")
    Y = _sketch(op, k, rng, omega)
    X = None
    for _ in range(q):
        X, _ = orth_factor(op.apply(Y), orth)
        Y = op.apply_adjoint(X)
    Uhat, S, V = svd_econ(Y.T)
    return SVDApprox(X @ Uhat, S, V, op.ledger.snapshot(),
                     info={"method": "rsi_simple", "orth": orth,
                           "multiplications": 2 * q, "block_widths": [X.shape[1]]})


def _one_multiplication_output(op, Omega, X, S_x, orth, method):
    """Approximation from a single product: A projected onto range(Omega).

    A @ Omega = X @ S_x already holds, and Omega = Q_om @ R_om, so
    A Pi_Omega = X (S_x R_om^{-1}) Q_om^*.  No further products needed.
    """
    Q_om, R_om = qr_econ(Omega)
    T = sla.solve_triangular(R_om, S_x.T, trans="T", lower=False).T
    Uhat, S, Vhat = svd_econ(T)
    return SVDApprox(X @ Uhat, S, Q_om @ Vhat, op.ledger.snapshot(),
                     info={"method": method, "orth": orth, "multiplications": 1,
                           "block_widths": [X.shape[1]]})


def _rsi_states(op, k, rng=None, omega=None, orth="stabilized"):
    """Drive the extended iteration, yielding a state per multiplication.

    Each yielded state is (m, info, snapshot): snapshot() builds the
    SVDApprox for depth m, and info carries the core Frobenius mass for
    stopping plus the projector the approximation equals (side "left"
    means Ahat = basis basis* A, side "right" means Ahat = A basis
    basis*), which lets sweeps evaluate errors without the snapshot.
    Consuming one more state costs exactly one block multiplication.
    """
    Omega = _sketch(op, k, rng, omega)
    Y = Omega
    X, S_x = orth_factor(op.apply(Y), orth)
    m = 1
    Q_om, R_om = qr_econ(Omega)

    def snapshot_first(X=X, S_x=S_x):
        return _one_multiplication_output(op, Omega, X, S_x, orth, "rsi_extended")

    first_core = sla.solve_triangular(R_om, S_x.T, trans="T", lower=False)
    yield m, {"core_fro_sq": float((first_core ** 2).sum()),
              "side": "right", "basis": Q_om}, snapshot_first

    T = None
    while True:
        m += 1
        if m % 2 == 0:
            side, basis = "left", X
            Y, R = orth_factor(op.apply_adjoint(X), orth)
            T = R.T
        else:
            side, basis = "right", Y
            X, S = orth_factor(op.apply(Y), orth)
            T = S

        def snapshot(X=X, Y=Y, T=T, m=m):
            Uhat, S_vals, Vhat = svd_econ(T)
            return SVDApprox(X @ Uhat, S_vals, Y @ Vhat, op.ledger.snapshot(),
                             info={"method": "rsi_extended", "orth": orth,
                                   "multiplications": m,
                                   "block_widths": [X.shape[1]]})

        yield m, {"core_fro_sq": float((T ** 2).sum()),
                  "side": side, "basis": basis}, snapshot


def rsi_extended(op, k, stop, rng=None, omega=None, orth="stabilized", cap=None):
    """Subspace iteration under a StopRule, odd or even multiplications.

    The rule is checked after every product, so FixedMultiplications(m)
    spends exactly m products; the count includes the product that
    initializes the iteration.  An unreachable FroTolerance raises
    TerminationCapReached carrying the best approximation so far.
    """
    if k < 1:
        raise ValueError("rsi_extended needs k >= 1")
    if not op.has_adjoint:
        raise ValueError("rsi_extended needs products with A*; operator has none")
    if isinstance(stop, ResidualTolerance):
        raise ValueError("residual stopping needs the adaptive Krylov variants")
    if cap is None:
        cap = default_cap(op, k)

    for m, info, snapshot in _rsi_states(op, k, rng, omega, orth):
        if isinstance(stop, FixedMultiplications):
            if m >= stop.m:
                return snapshot()
        elif isinstance(stop, FroTolerance):
            if _fro_stop_met(stop, info["core_fro_sq"]):
                return snapshot()
            if m >= cap:
                raise TerminationCapReached(
                    f"Frobenius tolerance unreached after {m} multiplications",
                    approx=snapshot())
        else:
            raise TypeError(f"unsupported stop rule {stop!r}")
    raise AssertionError("unreachable")  # pragma: no cover
