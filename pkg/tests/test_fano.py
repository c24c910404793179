"""Unit tests for the Fano decoder."""

import math
import unittest

import numpy as np

from pacbench.channel import ebn0_to_esn0, frame_rng, transmit
from pacbench.construction import ChannelModel, bias_vector, node_cutoff_tree, rm_profile
from pacbench.core import InvalidInputError
from pacbench.demapper import LlrLattice
from pacbench.fano import (
    DecodeResult,
    FanoConfig,
    Outcome,
    anv,
    bias_for_mode,
    bit_metric,
    decode,
)
from pacbench.guessing import guess_lower_bound
from pacbench.polar import CodeSpec
from pacbench.pretransform import ConnPoly, RateProfile, extract_data, pac_encode, parse_octal_poly


def make_spec(N: int, K: int, g: str = "133") -> CodeSpec:
    return CodeSpec(N, K, rm_profile(N, K), parse_octal_poly(g))


def run_frame(spec: CodeSpec, bias, esn0: float, lineage, **kwargs):
    d = frame_rng(*lineage, 0).integers(0, 2, spec.K)
    v, u, x = pac_encode(d, spec)
    draw = transmit(x, esn0, tuple(lineage))
    result = decode(LlrLattice(draw.llrs), spec, FanoConfig(bias, **kwargs))
    return d, v, u, result


class TestBitMetric(unittest.TestCase):
    """Tests for bit_metric and bias_for_mode."""

    def test_erasure(self):
        self.assertEqual(bit_metric(0.0, 0, 0.3), -0.3)
        self.assertEqual(bit_metric(0.0, 1, 0.3), -0.3)

    def test_confident_decisions(self):
        self.assertAlmostEqual(bit_metric(60.0, 0, 0.25), 0.75)
        self.assertAlmostEqual(bit_metric(-60.0, 1, 0.25), 0.75)
        self.assertAlmostEqual(bit_metric(60.0, 1, 0.25), 1.0 - 60.0 - 0.25)

    def test_closed_form(self):
        for z in (-3.0, -0.5, 0.7, 4.0):
            for u in (0, 1):
                expected = 1.0 - math.log2(1.0 + 2.0 ** (-z * (-1) ** u)) - 0.4
                self.assertAlmostEqual(bit_metric(z, u, 0.4), expected, places=12)

    def test_no_overflow(self):
        self.assertTrue(math.isfinite(bit_metric(-5000.0, 0, 0.0)))

    def test_bias_modes(self):
        rates = [0.1, 0.5, 0.9]
        self.assertEqual(bias_for_mode(rates, "cutoff").tolist(), rates)
        self.assertTrue(np.allclose(bias_for_mode(rates, "fixed"), 0.5))
        with self.assertRaises(InvalidInputError):
            bias_for_mode(rates, "zero")


class TestFanoConfig(unittest.TestCase):
    """Validation of FanoConfig and decode arguments."""

    def test_rejects_bad_delta(self):
        with self.assertRaises(InvalidInputError):
            FanoConfig(np.zeros(4), delta=0.0)

    def test_rejects_bad_bias(self):
        with self.assertRaises(InvalidInputError):
            FanoConfig(np.zeros((2, 2)))
        with self.assertRaises(InvalidInputError):
            FanoConfig([0.1, math.nan])

    def test_rejects_negative_budget(self):
        with self.assertRaises(InvalidInputError):
            FanoConfig(np.zeros(4), max_visits=-1)

    def test_decode_argument_checks(self):
        spec = make_spec(8, 4)
        with self.assertRaises(InvalidInputError):
            decode(LlrLattice(np.zeros(8)), spec, FanoConfig(np.zeros(4)))
        with self.assertRaises(InvalidInputError):
            decode(LlrLattice(np.zeros(16)), spec, FanoConfig(np.zeros(8)))
        lat = LlrLattice(np.zeros(8))
        lat.advance(0)
        with self.assertRaises(InvalidInputError):
            decode(lat, spec, FanoConfig(np.zeros(8)))


class TestDecodeNoiseless(unittest.TestCase):
    """Decoding with saturated channel outputs."""

    def test_single_pass(self):
        rng = np.random.default_rng(40)
        for N, K in ((16, 11), (64, 22), (128, 64)):
            spec = make_spec(N, K, "3211")
            d = rng.integers(0, 2, K)
            v, u, x = pac_encode(d, spec)
            llrs = (1.0 - 2.0 * x) * 60.0
            result = decode(LlrLattice(llrs), spec, FanoConfig(np.full(N, 0.5)))
            self.assertEqual(result.outcome, Outcome.COMPLETED)
            self.assertEqual(result.visits, N)
            self.assertEqual(result.v_hat.tolist(), v.tolist())
            self.assertEqual(result.u_hat.tolist(), u.tolist())
            self.assertEqual(extract_data(result.v_hat, spec.profile).tolist(), d.tolist())

    def test_all_frozen(self):
        spec = CodeSpec(16, 0, RateProfile(np.zeros(16, dtype=bool)), parse_octal_poly("133"))
        draw = transmit(np.zeros(16, dtype=np.uint8), 0.3, (1, 2))
        result = decode(LlrLattice(draw.llrs), spec, FanoConfig(np.full(16, 0.4)))
        self.assertEqual(result.visits, 16)
        self.assertEqual(result.v_hat.tolist(), [0] * 16)
        self.assertEqual(result.outcome, Outcome.COMPLETED)


class TestDecodeNoisy(unittest.TestCase):
    """Decoding over the AWGN channel."""

    @classmethod
    def setUpClass(cls):
        cls.spec = make_spec(64, 22)
        cls.esn0 = ebn0_to_esn0(5.0, 22 / 64)
        cls.bias = bias_vector(ChannelModel.biawgn(cls.esn0), 64, mc_samples=20_000)

    def test_high_snr_frames_decode(self):
        for frame in range(20):
            d, v, u, result = run_frame(self.spec, self.bias, self.esn0, (0, 0, frame))
            self.assertEqual(result.outcome, Outcome.COMPLETED)
            self.assertEqual(result.v_hat.tolist(), v.tolist(), f"frame {frame}")
            self.assertGreaterEqual(result.visits, 64)

    def test_deterministic(self):
        low = ebn0_to_esn0(1.0, 22 / 64)
        a = run_frame(self.spec, self.bias, low, (3, 0, 1))[3]
        b = run_frame(self.spec, self.bias, low, (3, 0, 1))[3]
        self.assertEqual(a.visits, b.visits)
        self.assertEqual(a.v_hat.tolist(), b.v_hat.tolist())

    def test_no_repeated_node_threshold_pairs(self):
        low = ebn0_to_esn0(0.0, 22 / 64)
        for frame in range(5):
            result = run_frame(self.spec, self.bias, low, (4, 0, frame), trace=True, max_visits=20_000)[3]
            self.assertEqual(len(result.trace), result.visits)
            self.assertEqual(len(set(result.trace)), len(result.trace), f"frame {frame}")

    def test_visit_budget(self):
        low = ebn0_to_esn0(-1.0, 22 / 64)
        result = run_frame(self.spec, self.bias, low, (5, 0, 0), max_visits=0)[3]
        self.assertEqual(result.outcome, Outcome.VISIT_BUDGET_EXCEEDED)
        self.assertEqual(result.visits, 1)
        self.assertEqual(result.v_hat[1:].tolist(), [0] * 63)

    def test_budget_not_hit(self):
        result = run_frame(self.spec, self.bias, self.esn0, (6, 0, 0), max_visits=10_000)[3]
        self.assertEqual(result.outcome, Outcome.COMPLETED)

    def test_identity_polynomial(self):
        spec = CodeSpec(64, 22, rm_profile(64, 22), ConnPoly((1,)))
        d, v, u, result = run_frame(spec, self.bias, self.esn0, (7, 0, 0))
        self.assertEqual(result.u_hat.tolist(), result.v_hat.tolist())
        self.assertEqual(result.v_hat.tolist(), v.tolist())


class TestMetricDrift(unittest.TestCase):
    """Mean metric increments on the transmitted path and its wrong siblings."""

    def test_drift_signs(self):
        spec = make_spec(64, 22)
        esn0 = ebn0_to_esn0(3.0, 22 / 64)
        bias = bias_vector(ChannelModel.biawgn(esn0), 64, mc_samples=50_000)
        info = spec.profile.mask
        true_sum, wrong_sum, wrong_count = 0.0, 0.0, 0
        for frame in range(50):
            d = frame_rng(8, 0, frame, 0).integers(0, 2, spec.K)
            v, u, x = pac_encode(d, spec)
            lat = LlrLattice(transmit(x, esn0, (8, 0, frame)).llrs)
            for i in range(64):
                z = lat.soft_out()
                true_sum += bit_metric(z, int(u[i]), bias[i])
                if info[i]:
                    wrong_sum += bit_metric(z, 1 - int(u[i]), bias[i])
                    wrong_count += 1
                lat.advance(int(u[i]))
        self.assertGreaterEqual(true_sum / (50 * 64), 0.0)
        self.assertLess(wrong_sum / wrong_count, 0.0)


class TestGuessingLowerBound(unittest.TestCase):
    """Average visits against the guessing lower bound on a short code."""

    def test_mean_visits_above_bound(self):
        spec = make_spec(32, 26)
        esn0 = ebn0_to_esn0(2.0, 26 / 32)
        channel = ChannelModel.biawgn(esn0)
        r0 = float(node_cutoff_tree(channel, 32, 0, mc_samples=100_000).r0[0][0])
        bound = guess_lower_bound(32, 26 / 32, r0)
        self.assertGreater(bound, 1.0)
        bias = bias_vector(channel, 32, mc_samples=50_000)
        visits = [
            run_frame(spec, bias, esn0, (9, 0, frame), max_visits=100_000)[3].visits
            for frame in range(100)
        ]
        self.assertGreaterEqual(sum(visits) / len(visits), bound)


class TestAnv(unittest.TestCase):
    """Tests for the average node-visit statistic."""

    def _result(self, visits: int) -> DecodeResult:
        zeros = np.zeros(64, dtype=np.uint8)
        return DecodeResult(zeros, zeros, visits, Outcome.COMPLETED)

    def test_average(self):
        self.assertEqual(anv([self._result(64), self._result(128)], 64), 1.5)

    def test_empty(self):
        with self.assertRaises(InvalidInputError):
            anv([], 64)


if __name__ == "__main__":
    unittest.main()
