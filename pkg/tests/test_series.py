import unittest
from fractions import Fraction

import numpy as np

from fhptool.series import (PROVEN_CONVERGENT, PROVEN_DIVERGENT, UNKNOWN_EXPLICIT,
                            Asymptotic, SeriesCheck, check_series, decide, product)


class TestAsymptotic(unittest.TestCase):
    def test_power_law_summability(self):
        self.assertTrue(Asymptotic(power=2).summable())
        self.assertTrue(Asymptotic(power=Fraction(11, 10)).summable())
        self.assertFalse(Asymptotic(power=1).summable())
        self.assertFalse(Asymptotic(power=0).summable())
        self.assertFalse(Asymptotic(power=-3).summable())

    def test_exponential_dominates_power(self):
        self.assertTrue(Asymptotic(power=-50, linear=Fraction(1, 100)).summable())
        self.assertFalse(Asymptotic(power=50, linear=-1).summable())
        self.assertTrue(Asymptotic(linear=-5, quadratic=Fraction(1, 4)).summable())
        self.assertFalse(Asymptotic(linear=5, quadratic=Fraction(-1, 4)).summable())

    def test_algebra_is_exact(self):
        lam = Asymptotic(power=Fraction(1, 3))
        tau = Asymptotic(power=Fraction(2, 3))
        self.assertEqual(tau / lam ** 2, Asymptotic())
        self.assertEqual((tau / lam ** 2).trend(), 0)
        self.assertEqual(Asymptotic(power=2) * Asymptotic(power=3, linear=1),
                         Asymptotic(power=5, linear=1))

    def test_trend(self):
        self.assertEqual(Asymptotic(power=1).trend(), -1)
        self.assertEqual(Asymptotic(power=-1).trend(), 1)
        self.assertEqual(Asymptotic(power=-100, linear=1).trend(), -1)
        self.assertEqual(Asymptotic(power=100, quadratic=-1).trend(), 1)

    def test_eventual_min(self):
        fast = Asymptotic(power=4)
        slow = Asymptotic(power=2)
        self.assertEqual(fast.eventual_min(slow), fast)
        self.assertEqual(slow.eventual_min(fast), fast)
        self.assertEqual(slow.eventual_min(slow), slow)

    def test_product_with_explicit_is_unknown(self):
        self.assertIsNone(product((Asymptotic(power=1), 1), (None, -2)))
        self.assertEqual(product((Asymptotic(power=1), 2), (Asymptotic(power=3), -1)),
                         Asymptotic(power=-1))
        self.assertEqual(product(), Asymptotic())


class TestDecisions(unittest.TestCase):
    def test_decide(self):
        self.assertEqual(decide(Asymptotic(power=2)), PROVEN_CONVERGENT)
        self.assertEqual(decide(Asymptotic(power=1)), PROVEN_DIVERGENT)
        self.assertEqual(decide(None), UNKNOWN_EXPLICIT)

    def test_partial_sum_never_decides(self):
        # a tiny partial sum of a divergent series is still divergent
        check = check_series(Asymptotic(power=1), np.full(3, 1e-300))
        self.assertEqual(check.decision, PROVEN_DIVERGENT)
        self.assertTrue(check.divergent)
        self.assertEqual(check.terms, 3)

    def test_check_series_fields(self):
        check = check_series(Asymptotic(power=2), [1.0, 0.25, 1.0 / 9])
        self.assertTrue(check.convergent)
        self.assertAlmostEqual(check.partial_sum, 1.0 + 0.25 + 1.0 / 9)
        self.assertAlmostEqual(check.last_term, 1.0 / 9)
        self.assertEqual(check.as_dict()["decision"], PROVEN_CONVERGENT)

    def test_empty_series(self):
        check = check_series(None, np.zeros(0))
        self.assertEqual(check.partial_sum, 0.0)
        self.assertEqual(check.decision, UNKNOWN_EXPLICIT)

    def test_unknown_decision_rejected(self):
        with self.assertRaises(ValueError):
            SeriesCheck("Probably", 1.0)
