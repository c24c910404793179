"""Unit tests for guessing bounds and the optimal-guessing oracle."""

import math
import unittest

import numpy as np

from pacbench.core import InvalidInputError
from pacbench.guessing import (
    MAX_ORACLE_STATES,
    FiniteJointDist,
    arikan_bounds,
    cutoff_rate,
    entropy,
    expected_guesses,
    guess_lower_bound,
    massey_lower_bound,
    polarized_guess_bounds,
    product,
    rate_cap,
)


def random_dist(rng: np.random.Generator, M: int, Y: int) -> FiniteJointDist:
    prior = rng.random(M)
    channel = rng.random((M, Y))
    return FiniteJointDist(prior / prior.sum(), channel / channel.sum(axis=1, keepdims=True))


class TestFiniteJointDist(unittest.TestCase):
    """Validation of FiniteJointDist."""

    def test_valid(self):
        d = FiniteJointDist([0.5, 0.5], [[0.9, 0.1], [0.2, 0.8]])
        self.assertEqual(d.M, 2)
        self.assertAlmostEqual(float(d.joint.sum()), 1.0)

    def test_rejects_bad_prior(self):
        with self.assertRaises(InvalidInputError):
            FiniteJointDist([0.5, 0.6], [[1.0], [1.0]])

    def test_rejects_bad_rows(self):
        with self.assertRaises(InvalidInputError):
            FiniteJointDist([0.5, 0.5], [[0.5, 0.6], [0.5, 0.5]])

    def test_rejects_negative(self):
        with self.assertRaises(InvalidInputError):
            FiniteJointDist([1.5, -0.5], [[1.0], [1.0]])

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(InvalidInputError):
            FiniteJointDist([1.0], [[0.5, 0.5], [0.5, 0.5]])


class TestExpectedGuesses(unittest.TestCase):
    """Tests for the exhaustive oracle."""

    def test_revealing_channel(self):
        self.assertEqual(expected_guesses(FiniteJointDist(np.full(4, 0.25), np.eye(4))), 1.0)

    def test_useless_channel(self):
        for M in (1, 2, 4, 8):
            d = FiniteJointDist.independent(np.full(M, 1.0 / M))
            self.assertAlmostEqual(expected_guesses(d), (M + 1) / 2)

    def test_sorted_prior(self):
        d = FiniteJointDist.independent([0.1, 0.6, 0.3])
        self.assertAlmostEqual(expected_guesses(d), 0.6 + 2 * 0.3 + 3 * 0.1)

    def test_state_limit(self):
        d = FiniteJointDist.independent(np.full(MAX_ORACLE_STATES + 1, 1.0 / (MAX_ORACLE_STATES + 1)))
        with self.assertRaises(InvalidInputError):
            expected_guesses(d)


class TestBounds(unittest.TestCase):
    """Massey and Arikan bounds against the oracle."""

    def test_massey_values(self):
        self.assertEqual(massey_lower_bound(2.0), 2.0)
        self.assertEqual(massey_lower_bound(3.0), 3.0)

    def test_massey_domain(self):
        with self.assertRaises(InvalidInputError):
            massey_lower_bound(1.5)

    def test_massey_holds(self):
        rng = np.random.default_rng(20)
        for M in (4, 8, 16, 32):
            for _ in range(10):
                p = rng.dirichlet(np.full(M, 2.0))
                h = entropy(p)
                if h >= 2:
                    self.assertGreaterEqual(
                        expected_guesses(FiniteJointDist.independent(p)), massey_lower_bound(h)
                    )

    def test_single_input(self):
        d = FiniteJointDist([1.0], [[0.3, 0.7]])
        lower, upper = arikan_bounds(d)
        self.assertAlmostEqual(lower, 1.0)
        self.assertAlmostEqual(upper, 1.0)
        self.assertEqual(expected_guesses(d), 1.0)

    def test_uniform_sandwich(self):
        for M in (2, 4, 8):
            d = FiniteJointDist.independent(np.full(M, 1.0 / M))
            lower, upper = arikan_bounds(d)
            self.assertLessEqual(lower, (M + 1) / 2)
            self.assertLessEqual((M + 1) / 2, upper)

    def test_random_sandwich(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            M = int(rng.integers(1, 17))
            Y = int(rng.integers(1, 17))
            d = random_dist(rng, M, Y)
            lower, upper = arikan_bounds(d)
            g = expected_guesses(d)
            self.assertLessEqual(lower, g + 1e-9)
            self.assertLessEqual(g, upper + 1e-9)


class TestCutoffRate(unittest.TestCase):
    """R0 of finite channels."""

    def test_noiseless_binary(self):
        d = FiniteJointDist([0.5, 0.5], np.eye(2))
        self.assertAlmostEqual(cutoff_rate(d), 1.0)

    def test_useless(self):
        self.assertAlmostEqual(cutoff_rate(FiniteJointDist.independent([0.5, 0.5])), 0.0)

    def test_product_is_additive(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            d1 = random_dist(rng, 3, 4)
            d2 = random_dist(rng, 2, 5)
            self.assertAlmostEqual(cutoff_rate(product(d1, d2)), cutoff_rate(d1) + cutoff_rate(d2), places=10)


class TestGuessLowerBound(unittest.TestCase):
    """Tests for guess_lower_bound, rate_cap and the polarized halves."""

    def test_zero_exponent(self):
        self.assertEqual(guess_lower_bound(256, 0.4, 0.4), 1.0)

    def test_below_cutoff(self):
        self.assertLess(guess_lower_bound(256, 0.3, 0.4), 1.0)

    def test_bits_to_nats(self):
        self.assertAlmostEqual(guess_lower_bound(10, 0.5, 0.4), math.exp(10 * 0.1 * math.log(2.0)))

    def test_rejects_empty(self):
        with self.assertRaises(InvalidInputError):
            guess_lower_bound(0, 0.5, 0.4)

    def test_rate_cap(self):
        self.assertEqual(rate_cap(256, 0.3564, 0.1), 91)
        self.assertEqual(rate_cap(64, 0.0, 0.5), 0)
        self.assertEqual(rate_cap(8, 1.0, 0.1), 8)

    def test_rate_cap_domain(self):
        with self.assertRaises(InvalidInputError):
            rate_cap(0, 0.5)
        with self.assertRaises(InvalidInputError):
            rate_cap(8, 1.5)

    def test_polarized_halves(self):
        # rates matched to cutoff rates before and after one step
        N, K, r0 = 256, 93, 0.3564
        r0_minus, r0_plus = 0.17, 0.60
        full = guess_lower_bound(N, K / N, r0)
        minus, plus = polarized_guess_bounds(N, 21, 72, r0_minus, r0_plus)
        self.assertGreaterEqual(r0_minus + r0_plus, 2 * r0)
        self.assertLessEqual(minus, full)
        self.assertLessEqual(plus, full)
        self.assertLessEqual(minus * plus, full)

    def test_polarized_needs_even(self):
        with self.assertRaises(InvalidInputError):
            polarized_guess_bounds(7, 1, 2, 0.3, 0.6)


if __name__ == "__main__":
    unittest.main()
