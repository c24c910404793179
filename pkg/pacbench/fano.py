"""Fano sequential decoding of PAC codes."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .core import InvalidInputError
from .demapper import LlrLattice
from .polar import CodeSpec
from .pretransform import conv_encode, conv_parity

BIAS_MODES = ("cutoff", "fixed")


class Outcome(str, Enum):
    COMPLETED = "completed"
    VISIT_BUDGET_EXCEEDED = "visit_budget_exceeded"


@dataclass
class FanoConfig:
    """Threshold spacing, per-bit bias and an optional visit budget."""
    bias: np.ndarray
    delta: float = 1.0
    max_visits: Optional[int] = None
    trace: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidInputError(f"Threshold spacing must be positive, got {self.delta}")
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.bias.ndim != 1 or not np.isfinite(self.bias).all():
            raise InvalidInputError("Bias must be a finite 1-D vector")
        if self.max_visits is not None and self.max_visits < 0:
            raise InvalidInputError(f"max_visits must be >= 0, got {self.max_visits}")


@dataclass
class DecodeResult:
    v_hat: np.ndarray
    u_hat: np.ndarray
    visits: int
    outcome: Outcome
    # (path prefix, threshold) for every forward move, when tracing
    trace: list = field(default_factory=list)


def bias_for_mode(cutoff_rates, mode: str = "cutoff") -> np.ndarray:
    """Per-bit cutoff rates, or their mean on every bit for the fixed-bias metric."""
    rates = np.asarray(cutoff_rates, dtype=np.float64)
    if mode == "cutoff":
        return rates.copy()
    if mode == "fixed":
        return np.full_like(rates, rates.mean())
    raise InvalidInputError(f"Unknown bias mode: {mode} (expected one of {BIAS_MODES})")


def _softplus2(x: float) -> float:
    # log2(1 + 2^x) without overflow
    if x > 0:
        return x + math.log2(1.0 + 2.0 ** -x)
    return math.log2(1.0 + 2.0 ** x)


def bit_metric(z: float, u: int, b: float) -> float:
    """1 - log2(1 + 2^(-z·(-1)^u)) - b."""
    return 1.0 - _softplus2(-z if u == 0 else z) - b


def decode(lat: LlrLattice, spec: CodeSpec, cfg: FanoConfig) -> DecodeResult:
    """Fano search over the PAC tree driven by the demapper soft outputs.

    Information positions branch on v in {0, 1}, best metric first (v = 0 on a
    tie); frozen positions have the single branch v = 0. The threshold moves
    in whole steps of delta, kept as an integer count.
    """
    N = spec.N
    if lat.N != N:
        raise InvalidInputError(f"Lattice length {lat.N} does not match N={N}")
    if cfg.bias.size != N:
        raise InvalidInputError(f"Bias length {cfg.bias.size} does not match N={N}")
    if lat.cursor != 1:
        raise InvalidInputError("Decoder needs a freshly initialized lattice")

    mask = spec.profile.mask
    taps = spec.g.taps
    bias = cfg.bias
    delta = cfg.delta
    budget = cfg.max_visits
    info = np.flatnonzero(mask)
    first_info = int(info[0]) if info.size else N

    v = np.zeros(N, dtype=np.uint8)
    metric = np.zeros(N + 1)
    choice = np.zeros(N, dtype=np.int8)
    # ranked branches per depth: (metric, v, u) best first
    branches: list[list[tuple[float, int, int]]] = [[] for _ in range(N)]
    fresh = np.zeros(N, dtype=bool)

    level = 0  # threshold T = level * delta
    i = 0
    visits = 0
    trace = []
    outcome = Outcome.COMPLETED

    while i < N:
        if not fresh[i]:
            z = lat.soft_out()
            parity = conv_parity(v, i, taps)
            m0 = metric[i] + bit_metric(z, parity, bias[i])
            if mask[i]:
                m1 = metric[i] + bit_metric(z, parity ^ 1, bias[i])
                if m1 > m0:
                    branches[i] = [(m1, 1, parity ^ 1), (m0, 0, parity)]
                else:
                    branches[i] = [(m0, 0, parity), (m1, 1, parity ^ 1)]
            else:
                branches[i] = [(m0, 0, parity)]
            fresh[i] = True

        m_child, v_child, u_child = branches[i][choice[i]]
        threshold = level * delta
        if m_child >= threshold:
            if metric[i] < threshold + delta:
                # first visit: tighten
                level = max(level, math.floor(m_child / delta))
            v[i] = v_child
            metric[i + 1] = m_child
            lat.advance(u_child)
            visits += 1
            i += 1
            if cfg.trace:
                trace.append((v[:i].tobytes(), level))
            if i < N:
                choice[i] = 0
                fresh[i] = False
            if budget is not None and visits > budget:
                outcome = Outcome.VISIT_BUDGET_EXCEEDED
                break
            continue

        # look back; with only frozen nodes above there is nothing to revisit
        while True:
            if i <= first_info:
                level -= 1
                choice[i] = 0
                break
            if metric[i - 1] >= level * delta:
                i -= 1
                lat.retreat(i + 1)
                if choice[i] + 1 < len(branches[i]):
                    choice[i] += 1
                    break
                continue
            level -= 1
            choice[i] = 0
            break

    if outcome is Outcome.VISIT_BUDGET_EXCEEDED:
        v[i:] = 0
    return DecodeResult(
        v_hat=v,
        u_hat=conv_encode(v, spec.g),
        visits=visits,
        outcome=outcome,
        trace=trace,
    )


def anv(results: Iterable[DecodeResult], N: int) -> float:
    """Average number of node visits per decoded bit."""
    results = list(results)
    if not results:
        raise InvalidInputError("ANV of an empty collection")
    return sum(r.visits for r in results) / (len(results) * N)
