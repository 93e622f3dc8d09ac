"""Closed-form error bounds, Chebyshev utilities, parallel sums, and
Monte Carlo verification of the Gaussian moment formulas.

Bound evaluators consume a spectrum (never an operator): every tail
quantity is an exact sum over singular values.  Gapless bounds return
log-error-ratio values; gapped and sketch bounds return squared-error
values; each report labels which.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linop import as_rng
from .metrics import optimal_error

__all__ = [
    "BoundQuery",
    "BoundReport",
    "BoundInapplicable",
    "chebyshev",
    "chebyshev_log",
    "chebyshev_inv_exact",
    "chebyshev_inv_bound",
    "parallel_sum",
    "rsvd_bound",
    "nyssvd_bound",
    "gapless_bound",
    "gapped_bound",
    "mc_verify_rmt",
    "RmtReport",
]

_E = math.e


class BoundInapplicable(ValueError):
    """Query parameters fall outside the stated range of the bound."""


@dataclass
class BoundQuery:
    """Inputs of one bound evaluation.

    ``method`` is one of RSVD, RSI, RBKI, NysSVD, NysSI, NysBKI;
    ``variant`` one of expectation, tail, frobenius, spectral,
    schatten4.  ``m`` counts multiplications, ``s`` is the gap index
    (gapped bounds only), ``p`` the Schatten index, ``u``/``t`` the
    failure-probability knobs of the tail variant.
    """

    spec: np.ndarray
    k: int
    r: int
    m: int = None
    s: int = None
    p: float = np.inf
    method: str = "RSVD"
    variant: str = "expectation"
    u: float = None
    t: float = None

    def echo(self):
        return {"k": self.k, "r": self.r, "m": self.m, "s": self.s,
                "p": ("inf" if np.isinf(self.p) else self.p),
                "method": self.method, "variant": self.variant,
                "u": self.u, "t": self.t, "spectrum_length": int(len(self.spec))}


@dataclass
class BoundReport:
    """Evaluated bound value plus everything it was computed from."""

    value: float
    label: str
    inputs: dict
    tail_sums: dict = field(default_factory=dict)
    failure_probability: float = None
    gap: float = None

    def to_dict(self):
        return {"value": self.value, "label": self.label, "inputs": self.inputs,
                "tail_sums": self.tail_sums,
                "failure_probability": self.failure_probability, "gap": self.gap}

    def to_json(self):
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# Chebyshev polynomials of the first kind.
# ---------------------------------------------------------------------------

def chebyshev(q, x):
    """T_q(x) via the cos/cosh branch split at x = 1 (x >= 0)."""
    if x < 0:
        raise ValueError("chebyshev is evaluated for x >= 0 only")
    if q < 0:
        raise ValueError("chebyshev needs q >= 0")
    if x <= 1.0:
        return float(np.cos(q * np.arccos(x)))
    return float(np.cosh(q * np.arccosh(x)))


def chebyshev_log(q, x):
    """log T_q(x) for x >= 1, stable where T_q itself overflows."""
    if x < 1.0:
        raise ValueError("chebyshev_log needs x >= 1")
    t = float(np.arccosh(x))
    return q * t + np.log1p(np.exp(-2.0 * q * t)) - np.log(2.0)


def chebyshev_inv_exact(q, x):
    """Functional inverse T_q^{-1}(x) = cosh(arcosh(x)/q) for x >= 1."""
    if q < 1 or x < 1.0:
        raise ValueError("chebyshev_inv_exact needs q >= 1 and x >= 1")
    return float(np.cosh(np.arccosh(x) / q))


def chebyshev_inv_bound(q, x):
    """Closed-form upper bound exp((log(2x)/q)^2 / 2) on T_q^{-1}(x)."""
    if q < 1 or x < 1.0:
        raise ValueError("chebyshev_inv_bound needs q >= 1 and x >= 1")
    return float(np.exp(0.5 * (np.log(2.0 * x) / q) ** 2))


# ---------------------------------------------------------------------------
# Parallel sums.
# ---------------------------------------------------------------------------

def _check_psd(M, tol=1e-10):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("parallel_sum needs square matrices")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if float(np.abs(M - M.T).max(initial=0.0)) > tol * scale:
        raise ValueError("parallel_sum input is not symmetric")
    if float(sla.eigvalsh(0.5 * (M + M.T)).min()) < -tol * scale:
        raise ValueError("parallel_sum input is not psd within tolerance")
    return 0.5 * (M + M.T)


def parallel_sum(A, B):
    """Parallel sum A : B = A - A (A + B)^+ A (psd matrices or scalars).

    The scalar overload is the halved harmonic mean, with 0 : 0 = 0.
    """
    if np.isscalar(A) and np.isscalar(B):
        if A < 0 or B < 0:
            raise ValueError("scalar parallel_sum needs nonnegative inputs")
        total = A + B
        return 0.0 if total == 0.0 else A * B / total
    A = _check_psd(A)
    B = _check_psd(B)
    if A.shape != B.shape:
        raise ValueError("parallel_sum needs matrices of equal shape")
    out = A - A @ sla.pinvh(A + B) @ A
    return 0.5 * (out + out.T)


# ---------------------------------------------------------------------------
# Bound evaluators.
# ---------------------------------------------------------------------------

def _tails(spec, r):
    spec = np.asarray(spec, dtype=np.float64)
    head, tail = spec[:r], spec[r:]
    return {
        "head_fro_sq": float((head ** 2).sum()),
        "tail_fro_sq": float((tail ** 2).sum()),
        "head_trace": float(head.sum()),
        "tail_trace": float(tail.sum()),
    }


def _gaussian_failure_probability(u, t, k, r):
    return math.exp(-(u - 2.0) / 4.0) + math.sqrt(math.pi * r) * (t / _E) ** (-(k - r + 1) / 2.0)


def rsvd_bound(q):
    """Error bounds for the single-sketch approximation of a general matrix."""
    spec, k, r, p = np.asarray(q.spec, dtype=np.float64), q.k, q.r, q.p
    if not 1 <= r < len(spec):
        raise BoundInapplicable(f"need 1 <= r < {len(spec)}")
    tails = _tails(spec, r)
    t_f2 = tails["tail_fro_sq"]
    variant = q.variant
    if variant == "expectation":
        if k < r + 2:
            raise BoundInapplicable("expectation bound needs k >= r + 2")
        value = optimal_error(spec, r, p) ** 2 + r / (k - r - 1.0) * t_f2
        return BoundReport(value, "mean_square_error", q.echo(), tails)
    if variant == "tail":
        if k < r:
            raise BoundInapplicable("tail bound needs k >= r")
        if q.u is None or q.t is None:
            raise BoundInapplicable("tail bound needs u and t")
        value = optimal_error(spec, r, p) ** 2 + q.u * q.t * r / (k - r + 1.0) * t_f2
        return BoundReport(value, "square_error_with_failure_probability", q.echo(),
                           tails, failure_probability=_gaussian_failure_probability(q.u, q.t, k, r))
    if variant == "frobenius":
        h_f2 = tails["head_fro_sq"]
        if k >= r + 2:
            value = 1.0 + r / (k - r - 1.0)
        elif k == r + 1:
            value = np.inf if t_f2 == 0.0 else 1.0 + r * math.log1p(h_f2 / t_f2)
        elif k == r:
            value = np.inf if t_f2 == 0.0 else 1.0 + r * math.sqrt(math.pi * h_f2 / (2.0 * t_f2))
        else:
            raise BoundInapplicable("frobenius bound needs k >= r")
        return BoundReport(value, "relative_mean_square_frobenius", q.echo(), tails)
    if variant == "spectral":
        if k < r + 2:
            raise BoundInapplicable("spectral bound needs k >= r + 2")
        value = (1.0 + 2.0 * r / (k - r - 1.0)) * (
            optimal_error(spec, r, np.inf) ** 2 + _E ** 2 / (k - r) * t_f2)
        return BoundReport(value, "mean_square_spectral", q.echo(), tails)
    if variant == "schatten4":
        if k < r + 4:
            raise BoundInapplicable("schatten4 bound needs k >= r + 4")
        value = (1.0 + (r + 1.0) / (k - r - 3.0)) * (
            optimal_error(spec, r, 4) ** 2 + t_f2 / math.sqrt(k - r))
        return BoundReport(value, "sqrt_mean_fourth_schatten4", q.echo(), tails)
    raise BoundInapplicable(f"unknown variant {variant!r}")


def nyssvd_bound(q):
    """Error bounds for the single-sketch Nystrom approximation (psd input).

    Mirrors rsvd_bound with trace-norm tails: errors are first powers,
    the Frobenius family becomes a trace family, and the fourth-moment
    display becomes a Frobenius second moment.
    """
    spec, k, r, p = np.asarray(q.spec, dtype=np.float64), q.k, q.r, q.p
    if not 1 <= r < len(spec):
        raise BoundInapplicable(f"need 1 <= r < {len(spec)}")
    tails = _tails(spec, r)
    t_tr = tails["tail_trace"]
    variant = q.variant
    if variant == "expectation":
        if k < r + 2:
            raise BoundInapplicable("expectation bound needs k >= r + 2")
        value = optimal_error(spec, r, p) + r / (k - r - 1.0) * t_tr
        return BoundReport(value, "mean_error", q.echo(), tails)
    if variant == "tail":
        if k < r:
            raise BoundInapplicable("tail bound needs k >= r")
        if q.u is None or q.t is None:
            raise BoundInapplicable("tail bound needs u and t")
        value = optimal_error(spec, r, p) + q.u * q.t * r / (k - r + 1.0) * t_tr
        return BoundReport(value, "error_with_failure_probability", q.echo(), tails,
                           failure_probability=_gaussian_failure_probability(q.u, q.t, k, r))
    if variant == "frobenius":
        h_tr = tails["head_trace"]
        if k >= r + 2:
            value = 1.0 + r / (k - r - 1.0)
        elif k == r + 1:
            value = np.inf if t_tr == 0.0 else 1.0 + r * math.log1p(h_tr / t_tr)
        elif k == r:
            value = np.inf if t_tr == 0.0 else 1.0 + r * math.sqrt(math.pi * h_tr / (2.0 * t_tr))
        else:
            raise BoundInapplicable("trace bound needs k >= r")
        return BoundReport(value, "relative_mean_trace", q.echo(), tails)
    if variant == "spectral":
        if k < r + 2:
            raise BoundInapplicable("spectral bound needs k >= r + 2")
        value = (1.0 + 2.0 * r / (k - r - 1.0)) * (
            optimal_error(spec, r, np.inf) + _E ** 2 / (k - r) * t_tr)
        return BoundReport(value, "mean_spectral", q.echo(), tails)
    if variant == "schatten4":
        if k < r + 4:
            raise BoundInapplicable("second-moment bound needs k >= r + 4")
        value = (1.0 + (r + 1.0) / (k - r - 3.0)) * (
            optimal_error(spec, r, 2) + t_tr / math.sqrt(k - r))
        return BoundReport(value, "sqrt_mean_square_frobenius", q.echo(), tails)
    raise BoundInapplicable(f"unknown variant {variant!r}")


_GAPLESS_MIN_M = {"RSI": 2, "RBKI": 3, "NYSSI": 1, "NYSBKI": 2}


def gapless_bound(q):
    """Log-error-ratio bounds that assume nothing about singular value gaps.

    The returned value bounds log(E ||A - Ahat||^2 / sigma_{r+1}^2);
    rates are 1/m for the subspace iterations and 1/m^2 for the Krylov
    iterations.  Evaluated through log1p so huge tail sums stay exact.
    """
    spec, k, r, m = np.asarray(q.spec, dtype=np.float64), q.k, q.r, q.m
    method = q.method.upper()
    if method not in _GAPLESS_MIN_M:
        raise BoundInapplicable(f"no gapless bound for method {q.method!r}")
    if not 1 <= r < len(spec):
        raise BoundInapplicable(f"need 1 <= r < {len(spec)}")
    if k < r + 2:
        raise BoundInapplicable("gapless bounds need k >= r + 2")
    if m is None or m < _GAPLESS_MIN_M[method]:
        raise BoundInapplicable(
            f"gapless {method} bound needs m >= {_GAPLESS_MIN_M[method]}")
    sigma = spec[r]
    if sigma <= 0.0:
        raise BoundInapplicable("gapless bounds need sigma_{r+1} > 0")
    ratio_sum = float(((spec[r:] / sigma) ** 2).sum())
    base = r / (k - r - 1.0) * ratio_sum
    if method == "RSI":
        value = math.log1p(base) / (m - 1.0)
    elif method == "NYSSI":
        value = math.log1p(base) / (m - 0.5)
    elif method == "RBKI":
        value = math.log(4.0 + 4.0 * base) ** 2 / (4.0 * (m - 2.0) ** 2)
    else:  # NysBKI
        value = math.log(4.0 + 4.0 * base) ** 2 / (8.0 * (m - 1.5) ** 2)
    tails = _tails(spec, r)
    tails["tail_ratio_sq_sum"] = ratio_sum
    return BoundReport(value, "log_mean_square_error_ratio", q.echo(), tails)


def gapped_bound(q):
    """Squared-error bounds driven by the gap between sigma_r and sigma_s.

    value = ||A - [A]_r||_p^2 + prefactor(m, gap) * (s-1)/(k-s) * ||A - [A]_{s-1}||_F^2
    with exponential prefactors whose rates are gap (subspace iteration)
    or sqrt(gap) (Krylov).
    """
    spec, k, r, s, m, p = (np.asarray(q.spec, dtype=np.float64),
                           q.k, q.r, q.s, q.m, q.p)
    method = q.method.upper()
    if method not in _GAPLESS_MIN_M:
        raise BoundInapplicable(f"no gapped bound for method {q.method!r}")
    if s is None or not (1 <= r < s <= len(spec)):
        raise BoundInapplicable("gapped bounds need r < s <= len(spec)")
    if k <= s:
        raise BoundInapplicable("gapped bounds need k >= s + 1")
    if m is None:
        raise BoundInapplicable("gapped bounds need m")
    sr, ss = spec[r - 1], spec[s - 1]
    gap = 0.0 if sr + ss == 0.0 else float((sr - ss) / (sr + ss))
    if method == "RSI":
        pref = math.exp(-4.0 * (m - 2.0) * gap)
    elif method == "NYSSI":
        pref = math.exp(-4.0 * (m - 1.5) * gap)
    elif method == "RBKI":
        pref = 4.0 * math.exp(-4.0 * (m - 2.0) * math.sqrt(gap))
    else:  # NysBKI
        pref = 4.0 * math.exp(-4.0 * (m - 1.5) * math.sqrt(2.0 * gap))
    tail_s_f2 = float((spec[s - 1:] ** 2).sum())
    value = optimal_error(spec, r, p) ** 2 + pref * (s - 1.0) / (k - s) * tail_s_f2
    tails = _tails(spec, r)
    tails["tail_fro_sq_from_s"] = tail_s_f2
    return BoundReport(value, "mean_square_error", q.echo(), tails, gap=gap)


# ---------------------------------------------------------------------------
# Monte Carlo verification of the Gaussian moment formulas.
# ---------------------------------------------------------------------------

@dataclass
class RmtReport:
    target: str
    estimate: float
    exact_or_bound: float
    standard_error: float
    passed: bool
    kind: str
    trials: int
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"target": self.target, "estimate": self.estimate,
                "exact_or_bound": self.exact_or_bound,
                "standard_error": self.standard_error, "passed": bool(self.passed),
                "kind": self.kind, "trials": self.trials, "params": self.params}


def _mean_se(samples):
    samples = np.asarray(samples, dtype=np.float64)
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size))
    return mean, se


def _freq_se(hits, trials):
    p_hat = hits / trials
    return p_hat, math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / trials) / trials)


def _batched_pinv_wide(H):
    """Pseudoinverse of a batch of wide full-row-rank matrices."""
    HHt = H @ np.swapaxes(H, -1, -2)
    return np.swapaxes(np.linalg.solve(HHt, H), -1, -2)


def mc_verify_rmt(target, params, trials, rng=None):
    """Monte Carlo check of one Gaussian moment identity or tail bound.

    Equality targets pass when |estimate - exact| <= 3 standard errors;
    inequality and tail targets pass when the estimate does not exceed
    the bound.
    """
    if trials < 100:
        raise ValueError("mc_verify_rmt needs trials >= 100")
    rng = as_rng(rng)
    params = dict(params or {})

    if target == "frobenius_product":
        S = np.atleast_2d(np.asarray(params["S"], dtype=np.float64))
        T = np.atleast_2d(np.asarray(params["T"], dtype=np.float64))
        G = rng.standard_normal((trials, S.shape[1], T.shape[0]))
        samples = np.sum((S @ G @ T) ** 2, axis=(1, 2))
        exact = float((S ** 2).sum() * (T ** 2).sum())
        estimate, se = _mean_se(samples)
        passed = abs(estimate - exact) <= 3.0 * se
        return RmtReport(target, estimate, exact, se, passed, "equality", trials,
                         {"S_shape": list(S.shape), "T_shape": list(T.shape)})

    if target == "schatten4_product":
        S = np.atleast_2d(np.asarray(params["S"], dtype=np.float64))
        T = np.atleast_2d(np.asarray(params["T"], dtype=np.float64))
        G = rng.standard_normal((trials, S.shape[1], T.shape[0]))
        M = S @ G @ T
        sv = np.linalg.svd(M, compute_uv=False)
        samples = np.sum(sv ** 4, axis=1)
        s4 = float((sla.svdvals(S) ** 4).sum())
        t4 = float((sla.svdvals(T) ** 4).sum())
        sf2 = float((S ** 2).sum())
        tf2 = float((T ** 2).sum())
        exact = s4 * tf2 ** 2 + t4 * sf2 ** 2 + s4 * t4
        estimate, se = _mean_se(samples)
        passed = abs(estimate - exact) <= 3.0 * se
        return RmtReport(target, estimate, exact, se, passed, "equality", trials,
                         {"S_shape": list(S.shape), "T_shape": list(T.shape)})

    if target == "inverse_trace":
        r, k = int(params["r"]), int(params["k"])
        if not 1 <= r <= k - 2:
            raise ValueError("inverse_trace needs r <= k - 2")
        G = rng.standard_normal((trials, r, k))
        eigs = np.linalg.eigvalsh(G @ np.swapaxes(G, 1, 2))
        samples = (1.0 / eigs).sum(axis=1)
        exact = r / (k - r - 1.0)
        estimate, se = _mean_se(samples)
        passed = abs(estimate - exact) <= 3.0 * se
        return RmtReport(target, estimate, exact, se, passed, "equality", trials,
                         {"r": r, "k": k})

    if target == "inverse_trace_tail":
        r, k = int(params["r"]), int(params["k"])
        t = float(params.get("t", _E ** 2))
        u = params.get("u")
        if u is None:
            G = rng.standard_normal((trials, r, k))
            eigs = np.linalg.eigvalsh(G @ np.swapaxes(G, 1, 2))
            samples = (1.0 / eigs).sum(axis=1)
            threshold = _E * t * r / (k - r + 1.0)
            bound = math.sqrt(math.pi * r / (k - r + 1.0)) * t ** (-(k - r + 1) / 2.0)
            hits = int((samples > threshold).sum())
        else:
            u = float(u)
            dim = int(params.get("dim", 10))
            S = params.get("S")
            S = np.eye(dim) if S is None else np.atleast_2d(np.asarray(S, dtype=np.float64))
            G = rng.standard_normal((trials, S.shape[1], k))
            H = rng.standard_normal((trials, r, k))
            prod = S @ G @ _batched_pinv_wide(H)
            samples = np.sum(prod ** 2, axis=(1, 2))
            threshold = u * t * r / (k - r + 1.0) * float((S ** 2).sum())
            bound = _gaussian_failure_probability(u, t, k, r)
            hits = int((samples > threshold).sum())
        estimate, se = _freq_se(hits, trials)
        passed = estimate <= bound
        return RmtReport(target, estimate, min(bound, 1.0), se, passed, "tail",
                         trials, {"r": r, "k": k, "t": t, "u": u})

    if target == "spectral_product":
        r, k = int(params["r"]), int(params["k"])
        if k < r + 4:
            raise ValueError("spectral_product needs k >= r + 4")
        dim = int(params.get("dim", 10))
        S = params.get("S")
        S = np.eye(dim) if S is None else np.atleast_2d(np.asarray(S, dtype=np.float64))
        G = rng.standard_normal((trials, S.shape[1], k))
        H = rng.standard_normal((trials, r, k))
        prod = S @ G @ _batched_pinv_wide(H)
        samples = np.linalg.svd(prod, compute_uv=False)[:, 0] ** 2
        s_spec = float(sla.svdvals(S).max())
        s_fro = math.sqrt(float((S ** 2).sum()))
        bound = (math.sqrt(r / (k - r - 1.0)) * s_spec
                 + _E * math.sqrt((k + r) / 2.0) / (k - r) * s_fro) ** 2
        estimate, se = _mean_se(samples)
        passed = estimate <= bound
        return RmtReport(target, estimate, bound, se, passed, "inequality", trials,
                         {"r": r, "k": k, "S_shape": list(S.shape)})

    raise ValueError(f"unknown Monte Carlo target {target!r}")
