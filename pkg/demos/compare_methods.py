#!/usr/bin/env python3
"""Fast versus slow singular value decay: which algorithm earns its matvecs?

Runs the three general-purpose algorithms and their psd counterparts on
two synthetic diagonal test matrices -- one with exponentially decaying
singular values, one whose spectrum carries a long noise tail -- and
prints mean spectral errors against the number of matrix-vector
products.  The printed tables are the desk-scale version of the classic
comparison figure this library is built around: the single-sketch
methods win on fast decay, the block Krylov methods win on slow decay.
"""

import numpy as np

from sketchpack import (FixedMultiplications, diag_operator, make_spectrum,
                        nysbki, nyssi, nyssvd, rbki_extended, rsi_extended,
                        rsvd, spectral_error_estimate)

N = 2000
K = 50
SEEDS = range(8)

print(__doc__)

for kind in ("exp25", "noisy_slow"):
    spec = make_spectrum(kind, N)
    print(f"\n=== spectrum: {kind} (n={N}, k={K}) ===")
    print(f"{'method':>8} {'m':>3} {'km':>6} {'mean spectral error':>20}")

    # one-multiplication and two-multiplication baselines
    for name, runner, m in (
        ("nyssvd", lambda s: nyssvd(diag_operator(spec), K, rng=s), 1),
        ("rsvd", lambda s: rsvd(diag_operator(spec), K, rng=s), 2),
    ):
        errs = [spectral_error_estimate(spec, runner(s)) for s in SEEDS]
        print(f"{name:>8} {m:>3} {m * K:>6} {np.mean(errs):>20.5f}")

    # iterative methods at increasing depth
    for m in (3, 5, 7):
        for name, runner in (
            ("rsi", lambda s, m=m: rsi_extended(diag_operator(spec), K,
                                                FixedMultiplications(m), rng=s)),
            ("rbki", lambda s, m=m: rbki_extended(diag_operator(spec), K,
                                                  FixedMultiplications(m), rng=s)),
            ("nyssi", lambda s, m=m: nyssi(diag_operator(spec), K,
                                           FixedMultiplications(m), rng=s)),
            ("nysbki", lambda s, m=m: nysbki(diag_operator(spec), K,
                                             FixedMultiplications(m), rng=s)),
        ):
            errs = [spectral_error_estimate(spec, runner(s)) for s in SEEDS]
            print(f"{name:>8} {m:>3} {m * K:>6} {np.mean(errs):>20.5f}")

print("""
Reading the tables: on the fast-decay spectrum every method converges
almost immediately, so the cheapest ones (nyssvd with m=1, rsvd with
m=2) are the right choice.  On the slow-decay spectrum the extra
multiplications only pay off through the enriched Krylov spaces: at
equal km, rbki/nysbki sit well below rsi/nyssi.
""")
