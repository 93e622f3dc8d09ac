#!/usr/bin/env python3
"""Closed-form error bounds against measured errors, side by side.

For the slow-decay test spectrum this script evaluates the gapless
(log-error-ratio) and gapped (squared-error) bounds for subspace
iteration and block Krylov iteration, then measures the actual
mean-square relative errors over a handful of seeds.  The bounds are
guarantees, so every measured point sits below its curve; the point of
the comparison is the *slope*: log-error falls like 1/m for subspace
iteration and like 1/m^2 for Krylov, and a singular value gap upgrades
both to exponential rates.
"""

import math

import numpy as np

from sketchpack import (BoundInapplicable, BoundQuery, FixedMultiplications,
                        diag_operator, gapless_bound, gapped_bound,
                        make_spectrum, rbki_extended, rsi_extended,
                        spectral_error_estimate)

N, K, R, S = 2000, 100, 75, 81
SEEDS = range(5)
spec = make_spectrum("noisy_slow", N)
sigma_sq = spec[R] ** 2

print(__doc__)
print(f"n={N}, k={K}, comparison rank r={R}, gap index s={S}, "
      f"gap={(spec[R-1]-spec[S-1])/(spec[R-1]+spec[S-1]):.4f}\n")

header = (f"{'m':>3} {'method':>6} {'measured E||err||^2/s^2':>24} "
          f"{'gapless bound':>14} {'gapped bound':>13}")
print(header)
for m in range(3, 9):
    for method, runner in (
        ("rsi", rsi_extended),
        ("rbki", rbki_extended),
    ):
        ratios = []
        for seed in SEEDS:
            approx = runner(diag_operator(spec), K, FixedMultiplications(m),
                            rng=seed)
            ratios.append(spectral_error_estimate(spec, approx) ** 2 / sigma_sq)
        try:
            gapless = math.exp(gapless_bound(BoundQuery(
                spec=spec, k=K, r=R, m=m, method=method)).value)
            gapless_text = f"{gapless:14.3g}"
        except BoundInapplicable:
            gapless_text = f"{'n/a':>14}"
        gapped = gapped_bound(BoundQuery(spec=spec, k=K, r=R, s=S, m=m,
                                         method=method)).value / sigma_sq
        print(f"{m:>3} {method:>6} {np.mean(ratios):>24.4f} "
              f"{gapless_text} {gapped:>13.3g}")

print("""
The gapless bounds are worst-case (they assume no gap at all) and are
loose here; the gapped bounds track the Krylov method within an order
of magnitude once the exponential phase starts.  Swap in your own
spectrum to see where each regime begins.
""")
