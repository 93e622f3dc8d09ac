"""Randomized block Krylov iteration.

``rbki_simple`` runs a fixed number of multiply-orthogonalize-multiply
cycles; ``rbki_extended`` grows left and right bases alternately while
accumulating a small block-triangular core, so it stops after any
number of multiplications; ``rbki_adaptive`` additionally tracks
per-triplet residual columns and stops once the leading r of them fall
below a tolerance.

Every product's output is kept: each raw block either becomes the next
basis block or feeds the residual evaluation, which is what removes the
final wide multiply of older layouts (2qk products instead of 3qk - k).
"""

import numpy as np
import scipy.linalg as sla

from .approx import (FixedMultiplications, FroTolerance, ResidualTolerance,
                     SVDApprox, TerminationCapReached, _fro_stop_met,
                     _one_multiplication_output, _sketch, default_cap)
from .factor import block_orthogonalize, orth_factor, qr_econ, svd_econ

__all__ = ["rbki_simple", "rbki_extended", "rbki_adaptive"]


def rbki_simple(op, k, q, rng=None, omega=None, orth="stabilized"):
    """Block Krylov iteration, fixed depth q.

    Builds X_i = orth-against-past(A @ Y_{i-1}) and Y_i = A* @ X_i for
    i = 1..q, then takes the SVD of the stacked right blocks.  Exactly
    q products with A and q with A*, all at block width k (narrower
    only when stabilized QR deflates a block).  q = 1 coincides with
    rsvd.
    """
    if k < 1 or q < 1:
        raise ValueError("rbki_simple needs k, q >= 1")
    if not op.has_adjoint:
        raise ValueError("rbki_simple needs products with A*; operator has none")
    Y = _sketch(op, k, rng, omega)
    X_blocks, Y_blocks, widths = [], [], []
    for _ in range(q):
        X_new, _, _ = block_orthogonalize(op.apply(Y), X_blocks, orth)
        if X_new.shape[1] == 0:
            break  # basis saturated: the captured range is already exact
        X_blocks.append(X_new)
        widths.append(X_new.shape[1])
        Y = op.apply_adjoint(X_new)
        Y_blocks.append(Y)
    if not X_blocks:  # zero operator: the sketch itself deflated away
        return SVDApprox(np.zeros((op.rows, 0)), np.zeros(0),
                         np.zeros((op.cols, 0)), op.ledger.snapshot(),
                         info={"method": "rbki_simple", "orth": orth,
                               "multiplications": 1, "block_widths": []})
    Uhat, S, V = svd_econ(np.hstack(Y_blocks).T)
    return SVDApprox(np.hstack(X_blocks) @ Uhat, S, V, op.ledger.snapshot(),
                     info={"method": "rbki_simple", "orth": orth,
                           "multiplications": 2 * len(X_blocks),
                           "block_widths": widths})


def _grow(core, coef, diag):
    """Append a block column [coef; diag] to a block-triangular core."""
    top = np.hstack([core, coef])
    bottom = np.hstack([np.zeros((diag.shape[0], core.shape[1])), diag])
    return np.vstack([top, bottom])


def _rbki_states(op, k, rng=None, omega=None, orth="stabilized"):
    """Yield (m, core_fro_sq, snapshot) after every multiplication.

    Odd multiplications extend the left (X) basis from A @ Y_last and
    update the accumulator S; even ones extend the right (Y) basis from
    A* @ X_last and update R.  The accumulators hold first-pass
    orthogonalization coefficients, so the core T is exactly
    X_odd* A Y_even (odd steps) or (Y_even* A* X_odd)* (even steps).
    A state whose new block deflates to zero columns is final.
    """
    Omega = _sketch(op, k, rng, omega)
    X1, S_x = orth_factor(op.apply(Omega), orth)
    m = 1

    def snapshot_first(X1=X1, S_x=S_x):
        return _one_multiplication_output(op, Omega, X1, S_x, orth, "rbki_extended")

    Q_om, R_om = qr_econ(Omega)
    first_core = sla.solve_triangular(R_om, S_x.T, trans="T", lower=False)
    yield m, {"core_fro_sq": float((first_core ** 2).sum()),
              "side": "right", "basis_blocks": (Q_om,)}, snapshot_first

    odd_blocks, even_blocks = [X1], []
    widths = [X1.shape[1]]
    R = np.zeros((0, 0))            # A* [X_1 X_3 ...] = [Y_2 Y_4 ...] R
    S = np.zeros((X1.shape[1], 0))  # A  [Y_2 Y_4 ...] = [X_1 X_3 ...] S
    while True:
        m += 1
        if m % 2 == 0:
            side, proj_blocks = "left", tuple(odd_blocks)
            raw = op.apply_adjoint(odd_blocks[-1])
            Y_new, R_ii, R_coef = block_orthogonalize(raw, even_blocks, orth)
            R = _grow(R, R_coef, R_ii)
            T = R.T
            saturated = Y_new.shape[1] == 0
            if not saturated:
                even_blocks.append(Y_new)
                widths.append(Y_new.shape[1])
        else:
            raw = op.apply(even_blocks[-1])
            X_new, S_ii, S_coef = block_orthogonalize(raw, odd_blocks, orth)
            S = _grow(S, S_coef, S_ii)
            T = S
            side, proj_blocks = "right", tuple(even_blocks)
            saturated = X_new.shape[1] == 0
            if not saturated:
                odd_blocks.append(X_new)
                widths.append(X_new.shape[1])

        def snapshot(T=T, m=m, odd=tuple(odd_blocks), even=tuple(even_blocks),
                     saturated=saturated):
            Uhat, S_vals, Vhat = svd_econ(T)
            return SVDApprox(np.hstack(odd) @ Uhat, S_vals,
                             np.hstack(even) @ Vhat, op.ledger.snapshot(),
                             info={"method": "rbki_extended", "orth": orth,
                                   "multiplications": m,
                                   "block_widths": list(widths),
                                   "saturated": saturated})

        yield m, {"core_fro_sq": float((T ** 2).sum()), "side": side,
                  "basis_blocks": proj_blocks}, snapshot
        if saturated:
            return


def rbki_extended(op, k, stop, rng=None, omega=None, orth="stabilized", cap=None):
    """Block Krylov iteration under a StopRule, odd or even depth.

    The rule is checked after every product; FixedMultiplications(m)
    spends exactly m block products, the initializing product included.
    """
    if k < 1:
        raise ValueError("rbki_extended needs k >= 1")
    if not op.has_adjoint:
        raise ValueError("rbki_extended needs products with A*; operator has none")
    if isinstance(stop, ResidualTolerance):
        return rbki_adaptive(op, k, stop.r, stop.eps, rng=rng, omega=omega,
                             orth=orth, cap=cap)
    if cap is None:
        cap = default_cap(op, k)

    snapshot = None
    for m, info, snapshot in _rbki_states(op, k, rng, omega, orth):
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
    # The basis saturated before the rule fired.  With a fixed depth the
    # saturated approximation is already exact on the reachable range, so
    # return it; a Frobenius tolerance can no longer improve, so signal.
    if isinstance(stop, FroTolerance):
        raise TerminationCapReached("basis saturated before the Frobenius "
                                    "tolerance was reached", approx=snapshot())
    return snapshot()


def rbki_adaptive(op, k, r, eps, rng=None, omega=None, orth="stabilized", cap=None):
    """Block Krylov iteration with per-triplet residual stopping.

    After every full step the residual matrix E is assembled from raw
    block products that double as the next step's input, so quality
    assurance costs no extra multiplications beyond a single look-ahead
    block.  Columns of E are (A - Ahat) v_i on even steps (where
    Ahat = Pi A and the adjoint residual term vanishes) and
    (A - Ahat)* u_i on odd steps.  The iteration stops once the first r
    residual columns all have norm <= eps; a run that stops at depth m
    has spent m + 1 block products.
    """
    if k < 1 or r < 1 or eps <= 0:
        raise ValueError("rbki_adaptive needs k, r >= 1 and eps > 0")
    if not op.has_adjoint:
        raise ValueError("rbki_adaptive needs products with A*; operator has none")
    if cap is None:
        cap = default_cap(op, k)

    Omega = _sketch(op, k, rng, omega)
    X1, _ = orth_factor(op.apply(Omega), orth)
    odd_blocks, even_blocks = [X1], []
    W_blocks = [op.apply_adjoint(X1)]   # raw A* X_odd, aligned with odd blocks
    Z_blocks = []                       # raw A  Y_even, aligned with even blocks
    widths = [X1.shape[1]]
    R = np.zeros((0, 0))
    S = np.zeros((X1.shape[1], 0))
    m = 1
    resid = None
    saturated = False

    def build(Uhat, S_vals, Vhat, depth, products):
        return SVDApprox(np.hstack(odd_blocks) @ Uhat, S_vals,
                         np.hstack(even_blocks) @ Vhat, op.ledger.snapshot(),
                         info={"method": "rbki_adaptive", "orth": orth,
                               "multiplications": depth,
                               "products_total": products,
                               "block_widths": list(widths),
                               "residuals": None if resid is None else list(resid),
                               "saturated": saturated})

    while True:
        m += 1
        even_step = m % 2 == 0
        if even_step:
            Y_new, R_ii, R_coef = block_orthogonalize(W_blocks[-1], even_blocks, orth)
            R = _grow(R, R_coef, R_ii)
            saturated = Y_new.shape[1] == 0
        else:
            X_new, S_ii, S_coef = block_orthogonalize(Z_blocks[-1], odd_blocks, orth)
            S = _grow(S, S_coef, S_ii)
            saturated = X_new.shape[1] == 0
        if saturated:
            # The Krylov space stopped growing, so the captured range is
            # A-invariant and the present factorization is exact on it.
            Uhat, S_vals, Vhat = svd_econ(R.T if even_step else S)
            return build(Uhat, S_vals, Vhat, depth=m, products=m)
        if even_step:
            even_blocks.append(Y_new)
            widths.append(Y_new.shape[1])
            Z_blocks.append(op.apply(Y_new))
            Uhat, S_vals, Vhat = svd_econ(R.T)
            E = np.hstack(Z_blocks) @ Vhat - (np.hstack(odd_blocks) @ Uhat) * S_vals
        else:
            odd_blocks.append(X_new)
            widths.append(X_new.shape[1])
            W_blocks.append(op.apply_adjoint(X_new))
            Uhat, S_vals, Vhat = svd_econ(S)
            E = np.hstack(W_blocks) @ Uhat - (np.hstack(even_blocks) @ Vhat) * S_vals
        resid = np.linalg.norm(E, axis=0)
        if resid.size >= r and np.all(resid[:r] <= eps):
            return build(Uhat, S_vals, Vhat, depth=m, products=m + 1)
        if m >= cap:
            raise TerminationCapReached(
                f"residual tolerance unreached after {m} multiplications",
                approx=build(Uhat, S_vals, Vhat, depth=m, products=m + 1),
                residuals=resid)
