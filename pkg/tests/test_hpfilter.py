import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from fhptool.dense import MatrixEmbedding, second_difference_matrix
from fhptool.errors import PreconditionError, StructuralError
from fhptool.gaussian import (DiagonalCovariance, ModelSpec, conditional_expectation,
                              sample_pair, sample_pairs)
from fhptool.hpfilter import (CANDIDATE_SCALES, best_scalar_alpha, candidate_family,
                              classical_hp, evaluate_jb, filter_identity_gap, minimize,
                              optimal_b, residual, residual_covariance, scalar_operator,
                              smoothing_multipliers, verify_optimality)
from fhptool.spectral import (H1, H2, DiagonalOperator, HilbertElement, SequenceFamily,
                              SingularSystem)

from .util import family_model, random_model


def white_noise_model(truncation, kernel_dim, sigma_u, sigma_v, lam=1.0):
    A = SingularSystem.from_family(SequenceFamily.power_law(lam), truncation, kernel_dim)
    return ModelSpec(
        A,
        DiagonalCovariance.from_family(SequenceFamily.constant(sigma_u), truncation,
                                       np.full(kernel_dim, sigma_u), H1),
        DiagonalCovariance.from_family(SequenceFamily.constant(sigma_v), truncation,
                                       None, H2))


class TestMinimize(unittest.TestCase):
    def test_multipliers(self):
        A = SingularSystem([2.0, 1.0], kernel_dim=1)
        B = DiagonalOperator([0.5, 3.0], 0.0, H2)
        assert_allclose(smoothing_multipliers(A, B), [1.0 / 3.0, 0.25])
        y = minimize(A, B, HilbertElement([3.0, 4.0], [9.0]))
        assert_allclose(y.span, [1.0, 1.0])
        assert_array_equal(y.kernel, [9.0])

    def test_zero_operator_is_identity(self):
        A = SingularSystem([2.0, 1.0], kernel_dim=1)
        x = HilbertElement([3.0, 4.0], [9.0])
        self.assertEqual(minimize(A, scalar_operator(A, 0.0), x), x)

    def test_minimizer_beats_perturbations(self):
        rng = np.random.default_rng(5)
        m = random_model(rng)
        B = DiagonalOperator(rng.uniform(0.0, 3.0, m.truncation), 0.0, H2)
        x = HilbertElement(rng.normal(size=m.truncation), rng.normal(size=m.kernel_dim))
        y = minimize(m.A, B, x)
        best = evaluate_jb(m.A, B, x, y)
        weights = 1.0 + m.lambdas ** 2 * B.diag
        for scale in (1e-3, 1.0, 100.0):
            for _ in range(300):
                dy = HilbertElement(rng.normal(size=m.truncation),
                                    rng.normal(size=m.kernel_dim)) * scale
                value = evaluate_jb(m.A, B, x, y + dy)
                self.assertLess(best, value)
                # J is quadratic with zero gradient at its minimizer
                expected = np.sum(weights * dy.span ** 2) + np.sum(dy.kernel ** 2)
                self.assertAlmostEqual((value - best) / expected, 1.0, delta=1e-6)

    def test_preconditions(self):
        A = SingularSystem([2.0, 1.0])
        x = HilbertElement([1.0, 1.0])
        with self.assertRaises(PreconditionError):
            minimize(A, DiagonalOperator([1.0, -1e-3], 0.0, H2), x)
        with self.assertRaises(PreconditionError):
            scalar_operator(A, -1.0)
        with self.assertRaises(StructuralError):
            minimize(A, DiagonalOperator([1.0], 0.0, H2), x)
        with self.assertRaises(StructuralError):
            minimize(A, scalar_operator(A, 1.0), HilbertElement([1.0, 1.0], None, H2))


class TestOptimality(unittest.TestCase):
    def test_b_hat_diagonal(self):
        m = family_model(8, 2, 2, 8, 6)
        assert_allclose(optimal_b(m).diag, np.arange(1, 9.0) ** -2, rtol=1e-15)
        self.assertEqual(optimal_b(m).space, H2)

    def test_b_hat_beyond_float_range(self):
        A = SingularSystem([1.0, 0.5])
        m = ModelSpec(A, DiagonalCovariance([1.0, 1e10]),
                      DiagonalCovariance([1.0, 1e-300], None, H2))
        b_hat = optimal_b(m)
        self.assertEqual(b_hat.held, 1)
        self.assertTrue(np.all(np.isfinite(b_hat.diag)))
        x = HilbertElement([2.0, 3.0])
        filtered = minimize(A, b_hat, x)
        assert_array_equal(filtered.span, conditional_expectation(m, x).span)
        self.assertGreater(filtered.span[1], 0.0)
        assert_allclose(filtered.span[1], 3.0 * 1e-300 / (0.25 * 1e10), rtol=1e-12)
        self.assertTrue(np.isfinite(evaluate_jb(A, b_hat, x, filtered)))

    def test_pathwise_optimality(self):
        rng = np.random.default_rng(6)
        models = [family_model(16, 2, kernel_vars=[0.5, 2.0], y0=[1.0, -3.0])]
        models += [random_model(rng) for _ in range(4)]
        for index, m in enumerate(models):
            candidates = candidate_family(m, 200, seed=index)
            for i in range(20):
                x, _ = sample_pair(m, index, i)
                report = verify_optimality(m, x, candidates)
                self.assertEqual(report.violations, [])
                bound = np.linalg.norm(x.kernel - m.y0_kernel)
                self.assertLessEqual(abs(report.optimal_distance - bound),
                                     1e-12 * max(1.0, x.norm()))
                self.assertTrue(report.attains_bound)

    def test_workers_do_not_change_distances(self):
        m = family_model(12, 1)
        candidates = candidate_family(m, 30, seed=2)
        x, _ = sample_pair(m, 2)
        serial = verify_optimality(m, x, candidates, workers=1)
        threaded = verify_optimality(m, x, candidates, workers=3)
        self.assertEqual(serial.distances, threaded.distances)

    def test_candidate_family(self):
        m = family_model(6, 1)
        candidates = candidate_family(m, 10, seed=3)
        self.assertEqual(len(candidates), 1 + len(CANDIDATE_SCALES) + 10)
        assert_array_equal(candidates[0].diag, np.zeros(6))
        assert_allclose(candidates[1].diag, CANDIDATE_SCALES[0] * optimal_b(m).diag)
        self.assertTrue(all(B.is_psd() for B in candidates))
        again = candidate_family(m, 10, seed=3)
        self.assertEqual(candidates, again)

    def test_negative_candidate_rejected(self):
        m = family_model(4, 0)
        x, _ = sample_pair(m, 0)
        with self.assertRaises(PreconditionError):
            verify_optimality(m, x, [DiagonalOperator([1.0, 1.0, -1.0, 1.0], 0.0, H2)])

    def test_residual_span_vanishes(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m = random_model(rng)
            for _ in range(100):
                x = HilbertElement(rng.normal(size=m.truncation) * 10.0,
                                   rng.normal(size=m.kernel_dim))
                res = residual(m, x)
                self.assertLessEqual(np.linalg.norm(res.span), 1e-12 * x.norm())
                assert_allclose(res.kernel, x.kernel - m.y0_kernel, atol=1e-15)

    def test_identity_gap(self):
        m = family_model(10, 2, y0=[0.5, 0.5])
        x, _ = sample_pair(m, 9)
        gap = filter_identity_gap(m, x)
        self.assertLessEqual(np.max(np.abs(gap.as_vector())), 1e-12 * max(1.0, x.norm()))


class TestTraceFormula(unittest.TestCase):
    def check_trace(self, kernel_vars):
        m = family_model(8, len(kernel_vars), kernel_vars=kernel_vars,
                         y0=np.linspace(-1.0, 1.0, len(kernel_vars)))
        op, trace = residual_covariance(m)
        self.assertAlmostEqual(trace, float(np.sum(kernel_vars)))
        self.assertEqual(op.trace(), trace)
        batch = sample_pairs(m, 2024, 10000)
        b_hat = optimal_b(m)
        span = (batch.x_span * smoothing_multipliers(m.A, b_hat) -
                batch.x_span * (m.tau / (m.tau + m.lambdas ** 2 * m.mu)))
        sq = np.sum(span ** 2, axis=1) + np.sum((batch.x_kernel - m.y0_kernel) ** 2, axis=1)
        se = np.std(sq, ddof=1) / np.sqrt(sq.size)
        self.assertLessEqual(abs(np.mean(sq) - trace), max(3 * se, 1e-12))

    def test_no_kernel(self):
        self.check_trace([])

    def test_small_kernel(self):
        self.check_trace([0.5, 0.25])

    def test_unit_kernel(self):
        self.check_trace([1.0, 1.0])


class TestScalarSmoothing(unittest.TestCase):
    def test_best_scalar_alpha_recovers_noise_ratio(self):
        m = white_noise_model(20, 2, 0.6, 1.5)
        x, _ = sample_pair(m, 4)
        alpha = best_scalar_alpha(m, x)
        self.assertAlmostEqual(alpha / 0.4, 1.0, places=6)
        assert_array_equal(optimal_b(m).diag, np.full(20, 0.6 / 1.5))

    def test_classical_bridge(self):
        T = 16
        sigma_u, sigma_v = 2.0, 0.5
        alpha = sigma_u / sigma_v
        emb = MatrixEmbedding(second_difference_matrix(T))
        rng = np.random.default_rng(8)
        series = np.cumsum(np.cumsum(rng.normal(size=T))) + rng.normal(size=T)
        dense = classical_hp(series, alpha)
        spectral = emb.synthesize(minimize(emb.system, scalar_operator(emb.system, alpha),
                                           emb.analyze(series)))
        self.assertLessEqual(np.linalg.norm(spectral - dense), 1e-10 * np.linalg.norm(dense))

    def test_classical_hp_short_series(self):
        x = np.array([1.0, 2.0, 4.0, 2.0, 1.0])
        P = second_difference_matrix(5)
        for alpha in (0.5, 1.0, 10.0):
            trend = classical_hp(x, alpha)
            lhs = np.eye(5) + alpha * P.T.dot(P)
            self.assertLessEqual(np.max(np.abs(lhs.dot(trend) - x)), 1e-12)
            assert_allclose(trend, trend[::-1], atol=1e-12)
            self.assertAlmostEqual(np.sum(trend), np.sum(x), places=12)
            self.assertLess(np.ptp(trend), np.ptp(x))

    def test_classical_hp_preserves_lines(self):
        line = 3.0 - 0.25 * np.arange(10)
        assert_allclose(classical_hp(line, 1600.0), line, atol=1e-9)

    def test_classical_hp_rejects(self):
        with self.assertRaises(StructuralError):
            classical_hp([1.0, 2.0], 1.0)
        with self.assertRaises(PreconditionError):
            classical_hp([1.0, 2.0, 3.0], 0.0)
