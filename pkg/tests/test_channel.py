"""Unit tests for the BI-AWGN channel and its constants."""

import math
import unittest

import numpy as np

from pacbench.channel import (
    biawgn_constants,
    biawgn_constants_quad,
    cutoff_rate,
    dispersion_fer,
    ebn0_to_esn0,
    frame_rng,
    q_function,
    transmit,
)
from pacbench.core import InvalidInputError, QuadratureError
from pacbench.demapper import LLR_CLAMP

TEST_SNRS = (0.1, 0.5, 0.5758, 1.0, 2.0, 4.0)


class TestEbn0ToEsn0(unittest.TestCase):
    """Tests for ebn0_to_esn0."""

    def test_unit_rate(self):
        self.assertEqual(ebn0_to_esn0(0.0, 1.0), 1.0)

    def test_operating_points(self):
        self.assertAlmostEqual(ebn0_to_esn0(2.0, 93 / 256), 0.5758, places=4)
        self.assertAlmostEqual(ebn0_to_esn0(2.5, 0.5), 0.8891, places=4)

    def test_rejects_nonpositive_rate(self):
        with self.assertRaises(InvalidInputError):
            ebn0_to_esn0(1.0, 0.0)


class TestTransmit(unittest.TestCase):
    """Tests for transmit and frame_rng."""

    def test_frame_rng_reproducible(self):
        a = frame_rng(1, 2, 3).normal(size=5)
        b = frame_rng(1, 2, 3).normal(size=5)
        c = frame_rng(1, 2, 4).normal(size=5)
        self.assertEqual(a.tolist(), b.tolist())
        self.assertNotEqual(a.tolist(), c.tolist())

    def test_noiseless_signs(self):
        x = np.array([0, 1, 1, 0, 1, 0, 0, 0], dtype=np.uint8)
        draw = transmit(x, math.inf, (0, 0))
        self.assertEqual(draw.llrs.tolist(), ((1.0 - 2.0 * x) * LLR_CLAMP).tolist())

    def test_same_lineage_same_draw(self):
        x = np.zeros(64, dtype=np.uint8)
        a = transmit(x, 0.8, (7, 3, 11))
        b = transmit(x, 0.8, (7, 3, 11))
        c = transmit(x, 0.8, (7, 3, 12))
        self.assertEqual(a.llrs.tolist(), b.llrs.tolist())
        self.assertEqual(a.lineage, (7, 3, 11))
        self.assertNotEqual(a.llrs.tolist(), c.llrs.tolist())

    def test_llr_moments(self):
        esn0 = 1.0
        draw = transmit(np.zeros(200_000, dtype=np.uint8), esn0, (5,))
        mean = 4.0 * esn0 / math.log(2.0)
        var = 8.0 * esn0 / math.log(2.0) ** 2
        self.assertAlmostEqual(float(draw.llrs.mean()), mean, delta=0.01 * mean)
        self.assertAlmostEqual(float(draw.llrs.var()), var, delta=0.02 * var)

    def test_bit_one_flips_mean(self):
        draw = transmit(np.ones(50_000, dtype=np.uint8), 1.0, (6,))
        self.assertLess(float(draw.llrs.mean()), 0.0)

    def test_rejects_nonpositive_snr(self):
        with self.assertRaises(InvalidInputError):
            transmit([0, 1], 0.0, (0,))


class TestChannelConstants(unittest.TestCase):
    """Tests for cutoff_rate and biawgn_constants."""

    def test_cutoff_rate_anchor(self):
        self.assertAlmostEqual(cutoff_rate(0.5758), 0.3564, delta=5e-4)
        self.assertAlmostEqual(biawgn_constants(0.5758).cutoff_rate, 0.3564, delta=5e-4)

    def test_capacity_above_cutoff(self):
        for esn0 in TEST_SNRS:
            consts = biawgn_constants(esn0)
            self.assertGreater(consts.capacity, consts.cutoff_rate, f"esn0={esn0}")
            self.assertGreater(consts.cutoff_rate, 0.0)
            self.assertGreaterEqual(consts.dispersion, 0.0)

    def test_monotone_in_snr(self):
        consts = [biawgn_constants(esn0) for esn0 in TEST_SNRS]
        for lo, hi in zip(consts, consts[1:]):
            self.assertLessEqual(lo.capacity, hi.capacity)
            self.assertLessEqual(lo.cutoff_rate, hi.cutoff_rate)

    def test_extremes(self):
        self.assertLess(biawgn_constants(1e-3).capacity, 0.01)
        high = biawgn_constants(8.0)
        self.assertGreater(high.capacity, 0.999)
        self.assertLess(high.dispersion, 0.01)

    def test_quadrature_oracle_agrees(self):
        for esn0 in (0.3, 0.5758, 1.41):
            gh = biawgn_constants(esn0)
            quad = biawgn_constants_quad(esn0)
            self.assertAlmostEqual(gh.capacity, quad.capacity, places=7)
            self.assertAlmostEqual(gh.dispersion, quad.dispersion, places=7)

    def test_convergence_gate(self):
        with self.assertRaises(QuadratureError):
            biawgn_constants(1.0, tol=0.0)

    def test_rejects_bad_snr(self):
        for esn0 in (0.0, -1.0, math.inf):
            with self.assertRaises(InvalidInputError):
                biawgn_constants(esn0)


class TestDispersionFer(unittest.TestCase):
    """Tests for q_function and dispersion_fer."""

    def test_q_function(self):
        self.assertEqual(float(q_function(0.0)), 0.5)
        self.assertAlmostEqual(float(q_function(1.0)) + float(q_function(-1.0)), 1.0)

    def test_low_rate_is_reliable(self):
        self.assertLess(dispersion_fer(256, 10, 1.0), 1e-12)

    def test_at_capacity_with_correction(self):
        N, esn0 = 256, 0.7
        c = biawgn_constants(esn0).capacity
        self.assertAlmostEqual(dispersion_fer(N, N * c + 0.5 * math.log2(N), esn0), 0.5, places=9)

    def test_monotone_in_k(self):
        esn0 = ebn0_to_esn0(3.0, 0.5)
        fers = [dispersion_fer(256, k, esn0) for k in (96, 112, 128, 144, 160)]
        self.assertEqual(fers, sorted(fers))

    def test_monotone_in_snr(self):
        fers = [dispersion_fer(256, 128, ebn0_to_esn0(db, 0.5)) for db in (1.0, 2.0, 3.0, 4.0)]
        self.assertEqual(fers, sorted(fers, reverse=True))

    def test_log_term_helps(self):
        esn0 = ebn0_to_esn0(2.0, 0.5)
        self.assertLess(dispersion_fer(256, 128, esn0), dispersion_fer(256, 128, esn0, "plain"))

    def test_anchor_in_range(self):
        fer = dispersion_fer(256, 128, ebn0_to_esn0(3.0, 0.5))
        self.assertGreater(fer, 0.0)
        self.assertLess(fer, 1e-2)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(InvalidInputError):
            dispersion_fer(256, 0, 1.0)
        with self.assertRaises(InvalidInputError):
            dispersion_fer(256, 257, 1.0)
        with self.assertRaises(InvalidInputError):
            dispersion_fer(256, 128, 1.0, "exact")


if __name__ == "__main__":
    unittest.main()
