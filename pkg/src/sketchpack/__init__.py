"""Randomized low-rank matrix approximation toolkit.

Sketch-based SVD, randomized subspace iteration, randomized block
Krylov iteration, their Nystrom counterparts for psd matrices, adaptive
quality-assured variants, closed-form error-bound evaluators, and a
kernel spectral-clustering pipeline built on the psd solvers.
"""

from .approx import (FixedMultiplications, FroTolerance, ResidualTolerance,
                     SVDApprox, TerminationCapReached, rsi_extended, rsi_simple,
                     rsvd)
from .factor import (FactorizationFailure, block_orthogonalize, psd_factor,
                     qr_econ, stabilized_qr, svd_econ)
from .krylov import rbki_adaptive, rbki_extended, rbki_simple
from .linop import (AdjointUnavailable, LinearOperator, MatvecLedger,
                    dense_operator, diag_operator, gaussian_matrix,
                    ledger_snapshot, make_spectrum, noisy_dense,
                    read_binary_matrix, read_matrix_market, read_spectrum_csv,
                    write_binary_matrix, write_spectrum_csv)
from .metrics import (ErrorReport, error_report, optimal_error, schatten_error,
                      spectral_error_estimate, subspace_error, triplet_residuals,
                      truncate)
from .nystrom import (EigApprox, NystromUnstable, nysbki, nysbki_adaptive,
                      nyssi, nyssvd, nystrom_compress)
from .theory import (BoundInapplicable, BoundQuery, BoundReport, chebyshev,
                     chebyshev_inv_bound, chebyshev_inv_exact, chebyshev_log,
                     gapless_bound, gapped_bound, mc_verify_rmt, nyssvd_bound,
                     parallel_sum, rsvd_bound)
from .cluster import (ClusterResult, PointSet, kernel_operator, kmeans,
                      load_points, normalized_kernel, purity_score,
                      spectral_cluster)

__version__ = "0.1.0"
