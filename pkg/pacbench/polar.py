"""Polar transform over GF(2) in natural index order.

Public positions are 1-based (1..N) as in the rest of pac-bench; arrays are
0-based numpy vectors of dtype uint8 internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core import InvalidInputError

if TYPE_CHECKING:
    from .pretransform import ConnPoly, RateProfile


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def log2_length(n: int) -> int:
    """Return log2(n), raising InvalidInputError unless n is a power of two."""
    if not is_power_of_two(int(n)):
        raise InvalidInputError(f"Length {n} is not a power of two")
    return int(n).bit_length() - 1


def as_bits(bits, length: int | None = None) -> np.ndarray:
    """Validate a 0/1 sequence and return it as a uint8 array."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise InvalidInputError(f"Expected a 1-D bit vector, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidInputError("Bit vector contains values other than 0 and 1")
    if length is not None and arr.size != length:
        raise InvalidInputError(f"Expected {length} bits, got {arr.size}")
    return arr.astype(np.uint8)


def polar_encode(u) -> np.ndarray:
    """Compute x = u·F^{⊗n} over GF(2).

    Each stage folds the upper half of every block onto the lower half; the
    stages commute so they are applied from the widest block down.
    """
    x = as_bits(u).copy()
    n = log2_length(x.size)
    for s in range(n - 1, -1, -1):
        half = 1 << s
        view = x.reshape(-1, 2, half)
        view[:, 0, :] ^= view[:, 1, :]
    return x


def row_weight(N: int, i: int) -> int:
    """Hamming weight of row i (1-based) of F^{⊗n}."""
    log2_length(N)
    if not 1 <= i <= N:
        raise InvalidInputError(f"Row index {i} out of range 1..{N}")
    return 1 << (i - 1).bit_count()


def row_weights(N: int) -> np.ndarray:
    """Row weights of F^{⊗n} for all rows, 0-based array."""
    n = log2_length(N)
    idx = np.arange(N)
    pop = np.zeros(N, dtype=np.int64)
    for bit in range(n):
        pop += (idx >> bit) & 1
    return (1 << pop).astype(np.int64)


@dataclass(frozen=True)
class CodeSpec:
    """A PAC code: blocklength, rate profile and connection polynomial.

    K = 0 is accepted so that the all-frozen code (a single tree path) can be
    decoded.
    """
    N: int
    K: int
    profile: RateProfile
    g: ConnPoly

    def __post_init__(self):
        log2_length(self.N)
        if self.profile.N != self.N:
            raise InvalidInputError(
                f"Profile length {self.profile.N} does not match N={self.N}"
            )
        if self.profile.k != self.K:
            raise InvalidInputError(
                f"Profile has {self.profile.k} information positions, expected K={self.K}"
            )
        if not 0 <= self.K <= self.N:
            raise InvalidInputError(f"K={self.K} outside 0..{self.N}")

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def label(self) -> str:
        return f"pac-{self.N}-{self.K}"
