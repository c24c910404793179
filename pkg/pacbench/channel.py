"""BI-AWGN channel: BPSK transmission, channel constants and normal approximation."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import erfc, roots_hermite

from .core import InvalidInputError, QuadratureError
from .demapper import LLR_CLAMP
from .polar import as_bits

GH_ORDER = 63
GH_TOLERANCE = 1e-9
GH_MAX_DOUBLINGS = 4

NORMAL_APPROX_VARIANTS = ("with_log", "plain")


def frame_rng(*lineage: int) -> np.random.Generator:
    """Counter-based generator keyed by an integer lineage tuple."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(lineage))))


@dataclass(frozen=True)
class ChannelDraw:
    llrs: np.ndarray
    lineage: tuple[int, ...]


class ChannelConstants(NamedTuple):
    capacity: float
    dispersion: float
    cutoff_rate: float


def ebn0_to_esn0(ebn0_db: float, rate: float) -> float:
    """Linear Es/N0 for a code of the given rate (bits per channel use)."""
    if rate <= 0:
        raise InvalidInputError(f"Rate must be positive, got {rate}")
    return rate * 10.0 ** (ebn0_db / 10.0)


def transmit(x, esn0: float, lineage: tuple[int, ...]) -> ChannelDraw:
    """Send bits over BPSK/AWGN (0 -> +1, 1 -> -1) and return base-2 LLRs.

    esn0 = inf gives saturated, noiseless LLRs.
    """
    bits = as_bits(x)
    if not esn0 > 0:
        raise InvalidInputError(f"Es/N0 must be positive, got {esn0}")
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    if math.isinf(esn0):
        return ChannelDraw(symbols * LLR_CLAMP, tuple(lineage))
    rng = frame_rng(*lineage, 1)
    y = symbols + rng.normal(0.0, math.sqrt(1.0 / (2.0 * esn0)), size=bits.size)
    return ChannelDraw(4.0 * esn0 * y / math.log(2.0), tuple(lineage))


def cutoff_rate(esn0: float) -> float:
    """R0 of BI-AWGN with uniform inputs, in bits."""
    return 1.0 - math.log2(1.0 + math.exp(-esn0))


def _information_density(llr: np.ndarray) -> np.ndarray:
    # i(x;y) for uniform BPSK, llr in nats conditioned on the sent symbol
    return 1.0 - np.logaddexp(0.0, -llr) / math.log(2.0)


def _gh_moments(esn0: float, order: int) -> tuple[float, float]:
    t, w = roots_hermite(order)
    mu = 4.0 * esn0
    # LLR ~ N(mu, 2 mu) given the sent symbol
    dens = _information_density(mu + 2.0 * math.sqrt(mu) * t)
    w = w / math.sqrt(math.pi)
    c = float(np.dot(w, dens))
    v = float(np.dot(w, (dens - c) ** 2))
    return c, v


def biawgn_constants(esn0: float, order: int = GH_ORDER, tol: float = GH_TOLERANCE) -> ChannelConstants:
    """Capacity C, dispersion V (bits^2) and cutoff rate R0 of BI-AWGN.

    C and V come from Gauss-Hermite quadrature, accepted once doubling the
    order moves both by less than tol. The order is doubled a few times
    before giving up.
    """
    if not esn0 > 0 or math.isinf(esn0):
        raise InvalidInputError(f"Es/N0 must be positive and finite, got {esn0}")
    c, v = _gh_moments(esn0, order)
    for _ in range(GH_MAX_DOUBLINGS):
        c2, v2 = _gh_moments(esn0, 2 * order)
        if abs(c2 - c) < tol and abs(v2 - v) < tol:
            return ChannelConstants(c, max(v, 0.0), cutoff_rate(esn0))
        order, c, v = 2 * order, c2, v2
    raise QuadratureError(
        f"Gauss-Hermite did not converge at Es/N0={esn0}: "
        f"order {order // 2} gave C={c}, V={v}; order {order} gave C={c2}, V={v2}"
    )


def biawgn_constants_quad(esn0: float) -> ChannelConstants:
    """Same constants by adaptive integration over the LLR density."""
    if not esn0 > 0 or math.isinf(esn0):
        raise InvalidInputError(f"Es/N0 must be positive and finite, got {esn0}")
    mu = 4.0 * esn0
    sd = math.sqrt(2.0 * mu)

    def density(l):
        return math.exp(-((l - mu) ** 2) / (2.0 * sd * sd)) / (sd * math.sqrt(2.0 * math.pi))

    def info(l):
        return 1.0 - math.log1p(math.exp(-l)) / math.log(2.0) if l > -30 else 1.0 + (l - math.log1p(math.exp(l))) / math.log(2.0)

    lo, hi = mu - 12.0 * sd, mu + 12.0 * sd
    c, _ = integrate.quad(lambda l: info(l) * density(l), lo, hi, epsabs=1e-13, limit=200)
    v, _ = integrate.quad(lambda l: (info(l) - c) ** 2 * density(l), lo, hi, epsabs=1e-13, limit=200)
    return ChannelConstants(c, v, cutoff_rate(esn0))


def q_function(x):
    """Gaussian tail Q(x) = 0.5 * erfc(x / sqrt(2))."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def dispersion_fer(N: int, K: int, esn0: float, variant: str = "with_log") -> float:
    """Normal-approximation frame error rate for an (N, K) code on BI-AWGN."""
    if not 1 <= K <= N:
        raise InvalidInputError(f"Need 1 <= K <= N, got N={N}, K={K}")
    if variant not in NORMAL_APPROX_VARIANTS:
        raise InvalidInputError(f"Unknown normal approximation variant: {variant}")
    consts = biawgn_constants(esn0)
    numerator = N * consts.capacity - K
    if variant == "with_log":
        numerator += 0.5 * math.log2(N)
    spread = math.sqrt(N * consts.dispersion)
    if spread == 0.0:
        return 0.0 if numerator > 0 else (0.5 if numerator == 0 else 1.0)
    return float(q_function(numerator / spread))
