import json

import numpy as np
import pytest

from sketchpack.approx import FixedMultiplications, rsvd
from sketchpack.krylov import rbki_extended
from sketchpack.linop import diag_operator, dense_operator, gaussian_matrix, make_spectrum
from sketchpack.metrics import (ErrorReport, error_report, optimal_error,
                                schatten_error, schatten_norm,
                                spectral_error_estimate, subspace_error,
                                triplet_residuals, truncate)
from sketchpack.nystrom import nyssvd


class TestSchattenError:
    def test_exact_factorization_is_zero(self):
        # Full-width sketch: the whole matrix is captured (the stabilized
        # factorization deflates the later, fully dependent blocks).
        spec = make_spectrum("exp25", 50)
        approx = rbki_extended(diag_operator(spec), 50, FixedMultiplications(4),
                               rng=0)
        assert schatten_error(np.diag(spec), approx, np.inf) < 1e-12 * spec[0]

    def test_zero_approximation_norms(self):
        from sketchpack.approx import SVDApprox

        zero = SVDApprox(np.zeros((2, 0)), np.zeros(0), np.zeros((2, 0)))
        A = np.diag([3.0, 4.0])
        assert schatten_error(A, zero, np.inf) == 4.0
        assert schatten_error(A, zero, 2) == 5.0
        assert schatten_error(A, zero, 1) == 7.0

    def test_pythagoras_for_projection_approximations(self):
        # ||A - Ahat||_F^2 = ||A||_F^2 - ||Ahat||_F^2 when Ahat projects A.
        spec = make_spectrum("noisy_slow", 300)
        A = np.diag(spec)
        approx = rsvd(diag_operator(spec), 25, rng=1)
        direct = schatten_error(A, approx, 2) ** 2
        identity = (spec ** 2).sum() - (approx.S ** 2).sum()
        assert abs(direct - identity) <= 1e-8 * direct

    def test_norm_ordering_in_p(self):
        spec = make_spectrum("noisy_slow", 200)
        approx = rsvd(diag_operator(spec), 15, rng=2)
        errs = [schatten_error(np.diag(spec), approx, p) for p in (1, 2, 4, np.inf)]
        assert all(a >= b for a, b in zip(errs, errs[1:]))

    def test_dimension_mismatch(self):
        approx = rsvd(diag_operator([1.0, 0.5]), 1, rng=3)
        with pytest.raises(ValueError):
            schatten_error(np.eye(3), approx, 2)


class TestOptimalError:
    def test_spectral_tail(self):
        spec = make_spectrum("exp25", 100)
        assert optimal_error(spec, 7, np.inf) == spec[7]

    def test_last_index(self):
        spec = make_spectrum("exp25", 50)
        assert optimal_error(spec, 49, 2) == spec[-1]

    def test_rank_zero_step_spectrum(self):
        assert optimal_error(make_spectrum("exp_step", 10), 0, np.inf) == 1.0

    def test_lower_bounds_truncated_error(self):
        # Eckart-Young: any rank-r approximation is at least this bad.
        spec = make_spectrum("noisy_slow", 300)
        A = np.diag(spec)
        approx = truncate(rsvd(diag_operator(spec), 20, rng=4), 10)
        for p in (1, 2, np.inf):
            assert (schatten_error(A, approx, p)
                    >= optimal_error(spec, 10, p) - 1e-10)


class TestSubspaceError:
    def test_identical_subspaces(self):
        approx = rsvd(diag_operator(make_spectrum("exp25", 80)), 10, rng=5)
        assert subspace_error(approx, approx.V[:, :10], 10) < 1e-12

    def test_orthogonal_subspaces(self):
        from sketchpack.approx import SVDApprox

        V = np.eye(6)[:, :2]
        W = np.eye(6)[:, 2:4]
        approx = SVDApprox(np.eye(6)[:, :2], np.ones(2), W)
        assert abs(subspace_error(approx, V, 2) - 1.0) < 1e-12

    @pytest.mark.parametrize("theta", [0.1, 0.4, 1.0, 1.5])
    def test_rotation_gives_sine(self, theta):
        from sketchpack.approx import SVDApprox

        V = np.array([[1.0], [0.0]])
        W = np.array([[np.cos(theta)], [np.sin(theta)]])
        approx = SVDApprox(np.eye(2)[:, :1], np.ones(1), W)
        assert abs(subspace_error(approx, V, 1) - np.sin(theta)) < 1e-12

    def test_range(self):
        spec = make_spectrum("noisy_slow", 120)
        approx = rsvd(diag_operator(spec), 8, rng=6)
        err = subspace_error(approx, np.eye(120)[:, :8], 8)
        assert 0.0 <= err <= 1.0

    def test_rank_deficiency_rejected(self):
        approx = rsvd(diag_operator(make_spectrum("exp25", 40)), 4, rng=7)
        with pytest.raises(ValueError):
            subspace_error(approx, np.eye(40)[:, :8], 8)


class TestTripletResiduals:
    def test_exact_triplets_are_zero(self):
        spec = make_spectrum("exp25", 60)
        approx = rbki_extended(diag_operator(spec), 60, FixedMultiplications(4),
                               rng=8)
        resid = triplet_residuals(diag_operator(spec), approx, 5)
        assert np.all(resid <= 1e-10 * spec[0])

    def test_symmetric_case_is_sqrt_two_of_one_sided(self):
        spec = make_spectrum("exp25", 150)
        approx = nyssvd(diag_operator(spec), 12, rng=9)
        resid = triplet_residuals(diag_operator(spec), approx, 6)
        A = np.diag(spec)
        dense = approx.dense()
        for i in range(6):
            one_sided = np.linalg.norm((A - dense) @ approx.U[:, i])
            assert abs(resid[i] - np.sqrt(2) * one_sided) < 1e-10

    def test_backward_error_witness(self):
        # The residual bounds a perturbation E making the triplet exact:
        # construct E and confirm (A+E) has the triplet exactly.
        spec = make_spectrum("noisy_slow", 120)
        A = np.diag(spec)
        approx = rsvd(diag_operator(spec), 10, rng=10)
        resid = triplet_residuals(diag_operator(spec), approx, 3)
        Ahat = approx.dense()
        for i in range(3):
            u = approx.U[:, i:i + 1]
            v = approx.V[:, i:i + 1]
            s = approx.S[i]
            R = A - Ahat
            E = -R @ v @ v.T - u @ u.T @ R @ (np.eye(120) - v @ v.T)
            perturbed = A + E
            assert np.linalg.norm(perturbed @ v - s * u) < 1e-10
            assert np.linalg.norm(perturbed.T @ u - s * v) < 1e-10
            assert np.linalg.norm(E, "fro") <= resid[i] + 1e-12

    def test_rank_check(self):
        approx = rsvd(diag_operator(make_spectrum("exp25", 30)), 3, rng=11)
        with pytest.raises(ValueError):
            triplet_residuals(diag_operator(make_spectrum("exp25", 30)), approx, 5)


class TestTruncate:
    def test_full_rank_is_identity(self):
        approx = rsvd(diag_operator(make_spectrum("exp25", 40)), 6, rng=12)
        same = truncate(approx, approx.rank)
        assert np.array_equal(same.S, approx.S)

    def test_rank_zero(self):
        approx = rsvd(diag_operator(make_spectrum("exp25", 40)), 6, rng=13)
        zero = truncate(approx, 0)
        assert zero.rank == 0
        assert np.abs(zero.dense()).max() == 0.0

    def test_eckart_young_on_the_approximation(self):
        approx = rsvd(diag_operator(make_spectrum("noisy_slow", 200)), 20, rng=14)
        r = 8
        trunc = truncate(approx, r)
        gap = np.linalg.norm(approx.dense() - trunc.dense(), 2)
        assert abs(gap - approx.S[r]) < 1e-12


class TestErrorReport:
    def test_norm_ordering_invariant(self):
        spec = make_spectrum("noisy_slow", 150)
        report = error_report(np.diag(spec), rsvd(diag_operator(spec), 10, rng=15),
                              spec=spec, r=10)
        assert report.trace >= report.frobenius >= report.spectral >= 0.0

    def test_json_fixed_field_names(self):
        report = ErrorReport(1.0, 2.0, 3.0, 0.5, 10, 20)
        data = json.loads(report.to_json())
        assert set(data) == {"spectral", "frobenius", "trace",
                             "relative_to_sigma", "matvecs_A", "matvecs_At"}
        assert ErrorReport.from_json(report.to_json()) == report


class TestFastEstimator:
    def test_matches_dense_on_diag_reference(self):
        spec = make_spectrum("noisy_slow", 300)
        approx = rbki_extended(diag_operator(spec), 20, FixedMultiplications(5),
                               rng=16)
        fast = spectral_error_estimate(spec, approx)
        dense = schatten_error(np.diag(spec), approx, np.inf)
        assert abs(fast - dense) <= 1e-8 * dense

    def test_matches_dense_on_dense_reference(self):
        G = gaussian_matrix(17, 120, 90)
        op = dense_operator(G)
        approx = rsvd(op, 15, rng=18)
        fast = spectral_error_estimate(G, approx)
        dense = schatten_error(G, approx, np.inf)
        assert abs(fast - dense) <= 1e-8 * dense


class TestSchattenNorm:
    def test_values(self):
        s = np.array([3.0, 4.0])
        assert schatten_norm(s, np.inf) == 4.0
        assert schatten_norm(s, 2) == 5.0
        assert schatten_norm(s, 1) == 7.0

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            schatten_norm([1.0], 0.5)
