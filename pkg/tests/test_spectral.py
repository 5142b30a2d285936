import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from fhptool.errors import StructuralError
from fhptool.series import Asymptotic
from fhptool.spectral import (H1, H2, DiagonalOperator, HilbertElement, SequenceFamily,
                              SingularSystem, apply_adjoint, apply_forward, inner,
                              project_kernel, project_pi, solve_min_norm)


class TestSequenceFamily(unittest.TestCase):
    def test_power_law_terms(self):
        fam = SequenceFamily.power_law(2, scale=3.0)
        assert_allclose(fam.terms(4), [3.0, 0.75, 3.0 / 9, 3.0 / 16])
        self.assertEqual(fam.asymptotic(), Asymptotic(power=2))

    def test_exponential_terms(self):
        fam = SequenceFamily.exponential(0.5)
        assert_allclose(fam.terms(3), np.exp(-0.5 * np.arange(1, 4)))
        quad = SequenceFamily.exponential(0.5, quadratic=True)
        assert_allclose(quad.terms(3), np.exp(-0.5 * np.arange(1, 4) ** 2))
        self.assertEqual(quad.asymptotic(), Asymptotic(quadratic=0.5))

    def test_constant_and_explicit(self):
        assert_array_equal(SequenceFamily.constant(2.5).terms(3), [2.5, 2.5, 2.5])
        self.assertEqual(SequenceFamily.constant(2.5).asymptotic(), Asymptotic())
        fam = SequenceFamily.explicit([3.0, 2.0, 1.0])
        assert_array_equal(fam.terms(2), [3.0, 2.0])
        self.assertIsNone(fam.asymptotic())
        with self.assertRaises(StructuralError):
            fam.terms(4)

    def test_rejects_malformed(self):
        for args in ((0,), (-1,), (float("nan"),)):
            with self.assertRaisesRegex(StructuralError, "exponent must be > 0"):
                SequenceFamily.power_law(*args)
        with self.assertRaisesRegex(StructuralError, "rate must be > 0"):
            SequenceFamily.exponential(0)
        with self.assertRaisesRegex(StructuralError, "value must be > 0"):
            SequenceFamily.constant(0)
        with self.assertRaises(StructuralError):
            SequenceFamily.explicit([1.0, 2.0])
        with self.assertRaises(StructuralError):
            SequenceFamily.explicit([1.0, -1.0])
        with self.assertRaises(StructuralError):
            SequenceFamily("harmonic")

    def test_equality_by_parameters(self):
        self.assertEqual(SequenceFamily.power_law(2), SequenceFamily.power_law(2.0))
        self.assertNotEqual(SequenceFamily.power_law(2), SequenceFamily.power_law(3))


class TestSingularSystem(unittest.TestCase):
    def test_from_family(self):
        A = SingularSystem.from_family(SequenceFamily.power_law(1), 5, 2)
        self.assertEqual(A.truncation, 5)
        self.assertEqual(A.kernel_dim, 2)
        self.assertEqual(A.asymptotic(), Asymptotic(power=1))

    def test_rejects_bad_values(self):
        with self.assertRaises(StructuralError):
            SingularSystem([1.0, 2.0])
        with self.assertRaises(StructuralError):
            SingularSystem([1.0, 0.0])
        with self.assertRaises(StructuralError):
            SingularSystem([])
        with self.assertRaises(StructuralError):
            SingularSystem([1.0], kernel_dim=-1)
        with self.assertRaises(StructuralError):
            SingularSystem.from_family(SequenceFamily.power_law(1), 0)

    def test_arrays_are_read_only(self):
        A = SingularSystem([2.0, 1.0])
        with self.assertRaises(ValueError):
            A.lambdas[0] = 5.0


class TestHilbertElement(unittest.TestCase):
    def test_vector_layout(self):
        h = HilbertElement([1.0, 2.0], [3.0], H1)
        assert_array_equal(h.as_vector(), [3.0, 1.0, 2.0])
        self.assertEqual(HilbertElement.from_vector(h.as_vector(), 1), h)

    def test_h2_has_no_kernel(self):
        with self.assertRaises(StructuralError):
            HilbertElement([1.0], [1.0], H2)
        self.assertEqual(HilbertElement([1.0], None, H2).kernel_dim, 0)

    def test_arithmetic_and_norm(self):
        a = HilbertElement([3.0, 0.0], [4.0], H1)
        b = HilbertElement.basis(1, 2, 1)
        self.assertEqual(a.norm(), 5.0)
        self.assertEqual((a - b).span.tolist(), [2.0, 0.0])
        self.assertEqual((2 * b).span.tolist(), [2.0, 0.0])
        self.assertEqual(inner(a, b), 3.0)
        self.assertEqual(-(-a), a)

    def test_mismatch_is_structural(self):
        with self.assertRaises(StructuralError):
            HilbertElement([1.0], None, H1) + HilbertElement([1.0, 2.0], None, H1)
        with self.assertRaises(StructuralError):
            HilbertElement([1.0], None, H1) + HilbertElement([1.0], None, H2)
        with self.assertRaises(StructuralError):
            HilbertElement.basis(3, 2)


class TestOperators(unittest.TestCase):
    def setUp(self):
        self.A = SingularSystem([2.0, 0.5], kernel_dim=1)
        self.h = HilbertElement([1.0, -2.0], [7.0], H1)

    def test_forward_and_adjoint(self):
        Ah = apply_forward(self.A, self.h)
        self.assertEqual(Ah.space, H2)
        assert_array_equal(Ah.span, [2.0, -1.0])
        back = apply_adjoint(self.A, Ah)
        assert_array_equal(back.span, [4.0, -0.5])
        assert_array_equal(back.kernel, [0.0])

    def test_min_norm_solution(self):
        v = HilbertElement([2.0, 1.0], None, H2)
        y = solve_min_norm(self.A, v, [3.0])
        assert_allclose(apply_forward(self.A, y).span, v.span)
        assert_array_equal(y.kernel, [3.0])

    def test_projections_split(self):
        pi = project_pi(self.A, self.h)
        rest = project_kernel(self.A, self.h)
        self.assertEqual(pi + rest, self.h)
        self.assertEqual(inner(pi, rest), 0.0)

    def test_adjoint_identity(self):
        rng = np.random.default_rng(12)
        A = SingularSystem.from_family(SequenceFamily.power_law(1.5), 20, 3)
        for _ in range(50):
            h = HilbertElement(rng.normal(size=20), rng.normal(size=3), H1)
            g = HilbertElement(rng.normal(size=20), None, H2)
            self.assertAlmostEqual(inner(apply_forward(A, h), g),
                                   inner(h, apply_adjoint(A, g)), places=12)

    def test_project_pi_is_orthogonal_projector(self):
        rng = np.random.default_rng(13)
        A = SingularSystem.from_family(SequenceFamily.exponential(0.5), 12, 2)
        for _ in range(50):
            h = HilbertElement(rng.normal(size=12), rng.normal(size=2), H1)
            g = HilbertElement(rng.normal(size=12), rng.normal(size=2), H1)
            pi_h = project_pi(A, h)
            self.assertEqual(project_pi(A, pi_h), pi_h)
            self.assertAlmostEqual(inner(pi_h, g), inner(h, project_pi(A, g)), places=12)
            self.assertEqual(inner(pi_h, project_kernel(A, g)), 0.0)
            self.assertEqual(project_pi(A, project_kernel(A, h)), A.zeros())
            self.assertEqual(apply_forward(A, project_kernel(A, h)).norm(), 0.0)

    def test_diagonal_operator(self):
        op = DiagonalOperator([2.0, 3.0], [0.5], H1)
        out = op.apply(self.h)
        assert_array_equal(out.span, [2.0, -6.0])
        assert_array_equal(out.kernel, [3.5])
        self.assertEqual(op.norm(), 3.0)
        self.assertEqual(op.trace(), 5.5)
        self.assertTrue(op.is_psd())
        self.assertEqual(op.compose(op).diag.tolist(), [4.0, 9.0])
        self.assertEqual(DiagonalOperator.identity(2).apply(self.h), self.h)

    def test_diagonal_operator_rejects(self):
        with self.assertRaises(StructuralError):
            DiagonalOperator([1.0], -1.0)
        with self.assertRaises(StructuralError):
            DiagonalOperator([1.0, 2.0], 0.0, H2).apply(self.h)
        self.assertFalse(DiagonalOperator([1.0, -1.0], 0.0, H2).is_psd())
