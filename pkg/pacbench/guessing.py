"""Guessing bounds and an exhaustive optimal-guessing oracle.

Rates and cutoff rates are in bits throughout; guess_lower_bound converts to
nats at the single point where an exponential is taken.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError

PROB_TOLERANCE = 1e-9
MAX_ORACLE_STATES = 4096


@dataclass(frozen=True)
class FiniteJointDist:
    """Prior over inputs 1..M and a channel matrix P(y|x) of shape (M, |Y|)."""
    prior: np.ndarray
    channel: np.ndarray

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=np.float64)
        channel = np.asarray(self.channel, dtype=np.float64)
        if prior.ndim != 1 or channel.ndim != 2 or channel.shape[0] != prior.size:
            raise InvalidInputError(
                f"Prior of shape {prior.shape} does not match channel of shape {channel.shape}"
            )
        if prior.size < 1 or channel.shape[1] < 1:
            raise InvalidInputError("Alphabets must be nonempty")
        if (prior < 0).any() or (channel < 0).any():
            raise InvalidInputError("Probabilities must be nonnegative")
        if abs(prior.sum() - 1.0) > PROB_TOLERANCE:
            raise InvalidInputError(f"Prior sums to {prior.sum()}, not 1")
        if np.abs(channel.sum(axis=1) - 1.0).max() > PROB_TOLERANCE:
            raise InvalidInputError("Channel rows must sum to 1")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "channel", channel)

    @property
    def M(self) -> int:
        return self.prior.size

    @property
    def joint(self) -> np.ndarray:
        return self.prior[:, None] * self.channel

    @classmethod
    def independent(cls, prior) -> "FiniteJointDist":
        """Y carries no information about X."""
        prior = np.asarray(prior, dtype=np.float64)
        return cls(prior, np.ones((prior.size, 1)))


def entropy(p) -> float:
    """Shannon entropy in bits."""
    p = np.asarray(p, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def expected_guesses(d: FiniteJointDist) -> float:
    """E[G(X|Y)] for the optimal strategy (posteriors in decreasing order).

    Ties fall back to the input index.
    """
    joint = d.joint
    if joint.size > MAX_ORACLE_STATES:
        raise InvalidInputError(
            f"Oracle limited to {MAX_ORACLE_STATES} states, got {joint.size}"
        )
    ranks = np.arange(1, d.M + 1, dtype=np.float64)
    total = 0.0
    for y in range(joint.shape[1]):
        column = joint[:, y]
        order = np.argsort(-column, kind="stable")
        total += float(np.dot(ranks, column[order]))
    return total


def massey_lower_bound(h: float) -> float:
    """Massey's bound 2^H / 4 + 1, claimed only for H >= 2 bits."""
    if h < 2:
        raise InvalidInputError(f"Massey bound needs H >= 2 bits, got {h}")
    return 2.0 ** h / 4.0 + 1.0


def arikan_bounds(d: FiniteJointDist) -> tuple[float, float]:
    """Lower and upper bounds on E[G(X|Y)] with guessing moment 1."""
    upper = float((np.sqrt(d.joint).sum(axis=0) ** 2).sum())
    return upper / (1.0 + math.log(d.M)), upper


def cutoff_rate(d: FiniteJointDist) -> float:
    """R0(X;Y) in bits for the given input prior."""
    inner = (d.prior[:, None] * np.sqrt(d.channel)).sum(axis=0)
    return float(-math.log2((inner ** 2).sum()))


def product(d1: FiniteJointDist, d2: FiniteJointDist) -> FiniteJointDist:
    """Two independent uses; pair (x1, x2) maps to index x1·M2 + x2."""
    return FiniteJointDist(np.kron(d1.prior, d2.prior), np.kron(d1.channel, d2.channel))


def guess_lower_bound(N: int, rate: float, r0: float) -> float:
    """exp(N·(R - R0)) with R and R0 given in bits."""
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    return math.exp(N * (rate - r0) * math.log(2.0))


def rate_cap(n_bits: int, r0: float, epsilon: float = 0.1) -> int:
    """Largest number of information bits a node of n_bits channels may carry."""
    if n_bits < 1:
        raise InvalidInputError(f"Node length must be >= 1, got {n_bits}")
    if not 0.0 <= r0 <= 1.0:
        raise InvalidInputError(f"Cutoff rate {r0} outside [0, 1]")
    return math.floor(n_bits * r0 + epsilon)


def polarized_guess_bounds(
    N: int, k_minus: int, k_plus: int, r0_minus: float, r0_plus: float
) -> tuple[float, float]:
    """Guessing lower bounds for the two halves after one polarization step."""
    half = N // 2
    if half < 1 or 2 * half != N:
        raise InvalidInputError(f"N must be even and >= 2, got {N}")
    return (
        guess_lower_bound(half, k_minus / half, r0_minus),
        guess_lower_bound(half, k_plus / half, r0_plus),
    )
