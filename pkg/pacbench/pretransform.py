"""Rate profiling and the convolutional pre-transform u = v·T."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import InvalidInputError, PolynomialError
from .polar import CodeSpec, as_bits, log2_length, polar_encode


@dataclass(frozen=True)
class ConnPoly:
    """Connection polynomial g_0..g_m of the convolutional pre-transform."""
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or any(c not in (0, 1) for c in self.coeffs):
            raise PolynomialError(f"Invalid polynomial coefficients: {self.coeffs}")
        if self.coeffs[0] != 1 or self.coeffs[-1] != 1:
            raise PolynomialError(
                f"Connection polynomial needs g_0 = g_m = 1, got {list(self.coeffs)}"
            )

    @property
    def m(self) -> int:
        """Memory of the shift register."""
        return len(self.coeffs) - 1

    @property
    def taps(self) -> tuple[int, ...]:
        """Delays k >= 1 with g_k = 1."""
        return tuple(k for k, c in enumerate(self.coeffs) if k > 0 and c)

    @classmethod
    def from_octal(cls, text: str) -> "ConnPoly":
        return parse_octal_poly(text)

    def to_octal(self) -> str:
        return format(int("".join(str(c) for c in self.coeffs), 2), "o")


def parse_octal_poly(text: str) -> ConnPoly:
    """Parse an octal polynomial string; the most significant bit becomes g_0.

    >>> parse_octal_poly("133").coeffs
    (1, 0, 1, 1, 0, 1, 1)
    """
    text = text.strip()
    if not text or any(ch not in "01234567" for ch in text):
        raise PolynomialError(f"Not an octal polynomial: {text!r}")
    value = int(text, 8)
    if value == 0:
        raise PolynomialError(f"Polynomial {text!r} is zero")
    return ConnPoly(tuple(int(b) for b in format(value, "b")))


class RateProfile:
    """Boolean mask over positions 1..N; True marks an information position."""

    __slots__ = ("mask",)

    def __init__(self, mask):
        arr = np.asarray(mask, dtype=bool).copy()
        if arr.ndim != 1:
            raise InvalidInputError("Rate profile mask must be 1-D")
        log2_length(arr.size)
        arr.flags.writeable = False
        self.mask = arr

    @classmethod
    def from_positions(cls, N: int, positions: Iterable[int]) -> "RateProfile":
        mask = np.zeros(N, dtype=bool)
        for p in positions:
            if not 1 <= p <= N:
                raise InvalidInputError(f"Position {p} out of range 1..{N}")
            mask[p - 1] = True
        return cls(mask)

    @property
    def N(self) -> int:
        return int(self.mask.size)

    @property
    def k(self) -> int:
        return int(self.mask.sum())

    @property
    def positions(self) -> list[int]:
        """Information positions, ascending and 1-based."""
        return [int(p) + 1 for p in np.flatnonzero(self.mask)]

    def count_in(self, start: int, stop: int) -> int:
        """Information positions within the 1-based inclusive span start..stop."""
        return int(self.mask[start - 1:stop].sum())

    def freeze(self, positions: Iterable[int]) -> "RateProfile":
        mask = self.mask.copy()
        for p in positions:
            mask[p - 1] = False
        return RateProfile(mask)

    def issubset(self, other: "RateProfile") -> bool:
        return self.N == other.N and not (self.mask & ~other.mask).any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RateProfile):
            return NotImplemented
        return np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def __repr__(self) -> str:
        return f"RateProfile(N={self.N}, K={self.k})"


def insert_data(d, profile: RateProfile) -> np.ndarray:
    """Place data bits on the information positions in increasing order."""
    bits = as_bits(d, length=profile.k)
    v = np.zeros(profile.N, dtype=np.uint8)
    v[profile.mask] = bits
    return v


def extract_data(v, profile: RateProfile) -> np.ndarray:
    return as_bits(v, length=profile.N)[profile.mask]


def conv_encode(v, g: ConnPoly) -> np.ndarray:
    """u_j = sum_i g_i v_{j-i} over GF(2), truncated to the length of v."""
    bits = as_bits(v)
    u = bits.copy()
    for k in g.taps:
        if k < bits.size:
            u[k:] ^= bits[:-k]
    return u


def conv_parity(v: np.ndarray, i: int, taps: tuple[int, ...]) -> int:
    """Register contribution of v_{i-k} (k in taps) to u_i, 0-based i."""
    acc = 0
    for k in taps:
        if k > i:
            break
        acc ^= int(v[i - k])
    return acc


def pac_encode(d, spec: CodeSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full encode chain; returns (v, u, x)."""
    v = insert_data(d, spec.profile)
    u = conv_encode(v, spec.g)
    return v, u, polar_encode(u)
