"""Polar demapper with full intermediate-LLR retention for sequential decoding.

All soft values are base-2 LLRs. The lattice keeps n+1 rows of N values: row n
holds channel LLRs and row 0 holds the bit-channel soft outputs. At row s the
block b (2^s values) lives at columns b·2^s .. (b+1)·2^s - 1, so every block
of the polarization tree owns a fixed slot and stays valid until the leaf that
starts it is entered again.
"""

import numpy as np

from .core import InvalidInputError, ProtocolError
from .polar import log2_length

LLR_CLAMP = 60.0


def boxplus2(a, b):
    """Check-node combination in the base-2 log domain.

    Equals log2((1 + 2^(a+b)) / (2^a + 2^b)), evaluated as a signed minimum
    plus two bounded corrections.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    core = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore"):
        return core + np.logaddexp2(0.0, -np.abs(a + b)) - np.logaddexp2(0.0, -np.abs(a - b))


class LlrLattice:
    """Soft-value and partial-sum lattice with a leaf cursor.

    The cursor is 1-based: soft_out() returns z_i for i = cursor.
    """

    def __init__(self, channel_llrs):
        llrs = np.asarray(channel_llrs, dtype=np.float64)
        if llrs.ndim != 1:
            raise InvalidInputError("Channel LLRs must be a 1-D vector")
        self.n = log2_length(llrs.size)
        self.N = llrs.size
        self.soft = np.zeros((self.n + 1, self.N), dtype=np.float64)
        self.bits = np.zeros((self.n + 1, self.N), dtype=np.uint8)
        self.soft[self.n] = np.clip(llrs, -LLR_CLAMP, LLR_CLAMP)
        self.cursor = 1
        self._fill(0, self.n)

    def _fill(self, leaf: int, top: int) -> None:
        """Recompute the blocks starting at 0-based `leaf` on rows top-1 .. 0."""
        soft, bits = self.soft, self.bits
        for s in range(top - 1, -1, -1):
            size = 1 << s
            start = (leaf >> s) << s
            pstart = (leaf >> (s + 1)) << (s + 1)
            upper = soft[s + 1, pstart:pstart + size]
            lower = soft[s + 1, pstart + size:pstart + 2 * size]
            if (leaf >> s) & 1:
                partial = bits[s, start - size:start]
                out = lower + (1.0 - 2.0 * partial) * upper
            else:
                out = boxplus2(upper, lower)
            soft[s, start:start + size] = np.clip(out, -LLR_CLAMP, LLR_CLAMP)

    def soft_out(self) -> float:
        """Soft output z_i for the leaf under the cursor."""
        if self.cursor > self.N:
            raise ProtocolError("All leaves decided; no soft output pending")
        return float(self.soft[0, self.cursor - 1])

    def advance(self, u_hat: int) -> "LlrLattice":
        """Record the decision for the current leaf and move to the next one."""
        i = self.cursor - 1
        if i >= self.N:
            raise ProtocolError(f"Cannot advance past leaf {self.N}")
        bits = self.bits
        bits[0, i] = 1 if u_hat else 0
        # completed right children push their partial sums one row up
        s, b = 0, i
        while b & 1 and s < self.n:
            size = 1 << s
            pstart = (b >> 1) << (s + 1)
            left = bits[s, pstart:pstart + size]
            right = bits[s, pstart + size:pstart + 2 * size]
            bits[s + 1, pstart:pstart + size] = left ^ right
            bits[s + 1, pstart + size:pstart + 2 * size] = right
            s += 1
            b >>= 1
        self.cursor += 1
        if i + 1 < self.N:
            self._fill(i + 1, (i ^ (i + 1)).bit_length())
        return self

    def retreat(self, target: int) -> "LlrLattice":
        """Move the cursor back to 1-based leaf `target`.

        Blocks feeding leaves up to `target` were last written with the same
        decided prefix, so only the cursor moves.
        """
        if not 1 <= target < self.cursor:
            raise ProtocolError(
                f"Retreat target {target} must lie in 1..{self.cursor - 1}"
            )
        self.cursor = target
        return self

    @property
    def decided(self) -> np.ndarray:
        """Decisions û_1..û_{cursor-1}."""
        return self.bits[0, :self.cursor - 1].copy()

    @classmethod
    def replay(cls, channel_llrs, u_prefix) -> "LlrLattice":
        """Fresh lattice advanced through a decided prefix."""
        lat = cls(channel_llrs)
        for u in u_prefix:
            lat.advance(int(u))
        return lat
