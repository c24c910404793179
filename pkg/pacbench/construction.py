"""Rate-profile construction: Bhattacharyya parameters, node cutoff rates,
RM and polar profiles, taming and merging.

Node (s, t) of the polarization tree is the t-th of the 2^s synthesized
channels at level s, covering positions t·N/2^s + 1 .. (t+1)·N/2^s. Child 2t
is the minus (check) channel and child 2t+1 the plus (variable) channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from tqdm import tqdm

from .channel import ebn0_to_esn0, frame_rng
from .core import InvalidInputError, UnsatisfiableConstructionError
from .demapper import boxplus2
from .guessing import rate_cap
from .polar import log2_length, row_weights
from .pretransform import RateProfile

DEFAULT_EPSILON = 0.1
DEFAULT_MC_SAMPLES = 1_000_000
# finite stand-in for a known bit when sampling the BEC
BEC_SAMPLE_LLR = 1e6


@dataclass(frozen=True)
class ChannelModel:
    kind: str  # "biawgn" or "bec"
    param: float  # linear Es/N0, or erasure probability

    def __post_init__(self):
        if self.kind == "biawgn":
            if not self.param > 0:
                raise InvalidInputError(f"Es/N0 must be positive, got {self.param}")
        elif self.kind == "bec":
            if not 0.0 <= self.param <= 1.0:
                raise InvalidInputError(f"Erasure probability {self.param} outside [0, 1]")
        else:
            raise InvalidInputError(f"Unknown channel kind: {self.kind}")

    @classmethod
    def biawgn(cls, esn0: float) -> "ChannelModel":
        return cls("biawgn", float(esn0))

    @classmethod
    def bec(cls, erasure: float) -> "ChannelModel":
        return cls("bec", float(erasure))

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelModel":
        return cls.biawgn(ebn0_to_esn0(ebn0_db, rate))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param}


def bhattacharyya_base(ch: ChannelModel) -> float:
    if ch.kind == "bec":
        return ch.param
    return math.exp(-ch.param)


def cutoff_from_z(z):
    """R0 = log2(2 / (1 + Z)); accepts scalars or arrays."""
    arr = np.asarray(z, dtype=np.float64)
    if (arr < -1e-12).any() or (arr > 1 + 1e-12).any():
        raise InvalidInputError(f"Bhattacharyya parameter outside [0, 1]: {z}")
    r0 = np.log2(2.0 / (1.0 + np.clip(arr, 0.0, 1.0)))
    return float(r0) if r0.ndim == 0 else r0


@dataclass
class NodeCutoffTree:
    """Per-node Bhattacharyya estimates, cutoff rates and caps on levels 0..levels."""
    N: int
    levels: int
    epsilon: float
    channel: ChannelModel
    z: list[np.ndarray]
    sigma: list[np.ndarray]
    mc_samples: int = 0
    seed: int = 0
    r0: list[np.ndarray] = field(init=False)
    caps: list[np.ndarray] = field(init=False)

    def __post_init__(self):
        self.r0 = []
        self.caps = []
        for s in range(self.levels + 1):
            r0 = np.atleast_1d(cutoff_from_z(self.z[s]))
            length = self.node_len(s)
            self.r0.append(r0)
            self.caps.append(np.array([rate_cap(length, float(r), self.epsilon) for r in r0], dtype=np.int64))

    def node_len(self, s: int) -> int:
        return self.N >> s

    def span(self, s: int, t: int) -> tuple[int, int]:
        """1-based inclusive position span of node (s, t)."""
        length = self.node_len(s)
        return t * length + 1, (t + 1) * length

    def node_of(self, s: int, position: int) -> int:
        return (position - 1) // self.node_len(s)

    def r0_sigma(self, s: int) -> np.ndarray:
        """Standard error of r0 at level s, first-order in the error of Z."""
        return self.sigma[s] / ((1.0 + self.z[s]) * math.log(2.0))

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "levels": self.levels,
            "epsilon": self.epsilon,
            "channel": self.channel.to_dict(),
            "mc_samples": self.mc_samples,
            "seed": self.seed,
            "nodes": [
                {
                    "level": s,
                    "index": t,
                    "span": list(self.span(s, t)),
                    "z": float(self.z[s][t]),
                    "sigma": float(self.sigma[s][t]),
                    "r0": float(self.r0[s][t]),
                    "cap": int(self.caps[s][t]),
                }
                for s in range(self.levels + 1)
                for t in range(1 << s)
            ],
        }


def _exact_bec_levels(z0: float, levels: int) -> list[np.ndarray]:
    zs = [np.array([z0])]
    for _ in range(levels):
        parent = zs[-1]
        child = np.empty(2 * parent.size)
        child[0::2] = 2 * parent - parent ** 2
        child[1::2] = parent ** 2
        zs.append(child)
    return zs


def _root_population(ch: ChannelModel, samples: int, seed: int) -> np.ndarray:
    """Base-2 LLRs of the all-zero word seen through the channel."""
    rng = frame_rng(seed, 0, 0, 0)
    if ch.kind == "bec":
        erased = rng.random(samples) < ch.param
        return np.where(erased, 0.0, BEC_SAMPLE_LLR)
    esn0 = ch.param
    llr = 4.0 * esn0 + math.sqrt(8.0 * esn0) * rng.standard_normal(samples)
    return llr / math.log(2.0)


def _sampled_levels(ch: ChannelModel, levels: int, samples: int, seed: int, progress: bool):
    """Genie-aided density evolution on a sample population, depth first."""
    zs = [np.zeros(1 << s) for s in range(levels + 1)]
    sigmas = [np.zeros(1 << s) for s in range(levels + 1)]
    bar = tqdm(total=(2 << levels) - 1, desc="density evolution", disable=not progress, leave=False)

    def visit(pop: np.ndarray, s: int, t: int) -> None:
        vals = np.exp2(-pop / 2.0)
        zs[s][t] = vals.mean()
        sigmas[s][t] = vals.std() / math.sqrt(vals.size)
        bar.update(1)
        if s == levels:
            return
        partner = pop[frame_rng(seed, s + 1, t, 1).permutation(pop.size)]
        visit(boxplus2(pop, partner), s + 1, 2 * t)
        visit(pop + partner, s + 1, 2 * t + 1)

    try:
        visit(_root_population(ch, samples, seed), 0, 0)
    finally:
        bar.close()
    return zs, sigmas


def node_cutoff_tree(
    ch: ChannelModel,
    N: int,
    levels: int,
    epsilon: float = DEFAULT_EPSILON,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    method: str = "auto",
    progress: bool = False,
) -> NodeCutoffTree:
    """Estimate Z, R0 and the information-bit cap of every node down to `levels`.

    method "auto" uses the exact recursion on the BEC and sampling otherwise;
    "mc" forces sampling on either channel.
    """
    n = log2_length(N)
    if not 0 <= levels <= n:
        raise InvalidInputError(f"Level {levels} outside 0..{n}")
    if method not in ("auto", "mc"):
        raise InvalidInputError(f"Unknown estimation method: {method}")
    if ch.kind == "bec" and method == "auto":
        zs = _exact_bec_levels(ch.param, levels)
        sigmas = [np.zeros_like(z) for z in zs]
        mc_samples = 0
    else:
        if mc_samples < 1:
            raise InvalidInputError("Monte-Carlo estimation needs mc_samples >= 1")
        zs, sigmas = _sampled_levels(ch, levels, mc_samples, seed, progress)
        zs = [np.clip(z, 0.0, 1.0) for z in zs]
    return NodeCutoffTree(N, levels, epsilon, ch, zs, sigmas, mc_samples, seed)


def bias_vector(
    ch: ChannelModel,
    N: int,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    progress: bool = False,
) -> np.ndarray:
    """Bit-channel cutoff rates b_1..b_N (0-based array)."""
    tree = node_cutoff_tree(ch, N, log2_length(N), mc_samples=mc_samples, seed=seed, progress=progress)
    return tree.r0[-1].copy()


def rm_dimension(m: int, r: int) -> int:
    """Dimension of RM(r, m): sum of C(m, j) for j <= r."""
    return sum(math.comb(m, j) for j in range(r + 1))


def is_rm_dimension(N: int, K: int) -> bool:
    m = log2_length(N)
    return any(rm_dimension(m, r) == K for r in range(m + 1))


def rm_profile(N: int, K: int) -> RateProfile:
    """Heaviest K rows of F^{⊗n}; ties go to the larger position."""
    if not 0 <= K <= N:
        raise InvalidInputError(f"K={K} outside 0..{N}")
    weights = row_weights(N)
    idx = np.arange(N)
    order = np.lexsort((-idx, -weights))
    mask = np.zeros(N, dtype=bool)
    mask[order[:K]] = True
    return RateProfile(mask)


def polar_profile(
    ch: ChannelModel,
    N: int,
    K: int,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    progress: bool = False,
) -> RateProfile:
    """K bit-channels with the smallest Bhattacharyya parameter."""
    if not 0 <= K <= N:
        raise InvalidInputError(f"K={K} outside 0..{N}")
    tree = node_cutoff_tree(ch, N, log2_length(N), mc_samples=mc_samples, seed=seed, progress=progress)
    z = tree.z[-1]
    idx = np.arange(N)
    order = np.lexsort((-idx, z))
    mask = np.zeros(N, dtype=bool)
    mask[order[:K]] = True
    return RateProfile(mask)


def profile_min_weight(profile: RateProfile) -> Optional[int]:
    """Smallest row weight among the information rows (None if all frozen)."""
    if profile.k == 0:
        return None
    return int(row_weights(profile.N)[profile.mask].min())


def tame_profile(
    profile: RateProfile, tree: NodeCutoffTree, level: int, all_levels: bool = False
) -> RateProfile:
    """Freeze the lowest information positions of every node over its cap.

    With all_levels the caps of levels 0..level are enforced, shallowest first.
    """
    if profile.N != tree.N:
        raise InvalidInputError(f"Profile length {profile.N} does not match tree N={tree.N}")
    if not 0 <= level <= tree.levels:
        raise InvalidInputError(f"Level {level} outside 0..{tree.levels}")
    mask = profile.mask.copy()
    for s in (range(level + 1) if all_levels else (level,)):
        length = tree.node_len(s)
        for t in range(1 << s):
            block = mask[t * length:(t + 1) * length]
            info = np.flatnonzero(block)
            excess = info.size - int(tree.caps[s][t])
            if excess > 0:
                block[info[:excess]] = False
    return RateProfile(mask)


def merge_profiles(
    base: RateProfile,
    donor: RateProfile,
    target_k: int,
    weight: int,
    tree: NodeCutoffTree,
    level: int,
) -> RateProfile:
    """Grow `base` to target_k with donor rows of the given weight.

    Candidates are taken in increasing position order; one that would push a
    level-`level` node of `tree` over its cap is skipped.
    """
    if base.N != donor.N or base.N != tree.N:
        raise InvalidInputError("Base, donor and tree lengths differ")
    if not 0 <= level <= tree.levels:
        raise InvalidInputError(f"Level {level} outside 0..{tree.levels}")
    if target_k < base.k:
        raise InvalidInputError(f"Target K={target_k} is below the base dimension {base.k}")
    mask = base.mask.copy()
    length = tree.node_len(level)
    counts = mask.reshape(-1, length).sum(axis=1)
    caps = tree.caps[level]
    weights = row_weights(base.N)
    k = base.k
    for p in np.flatnonzero(donor.mask & ~mask & (weights == weight)):
        if k == target_k:
            break
        node = p // length
        if counts[node] < caps[node]:
            mask[p] = True
            counts[node] += 1
            k += 1
    if k < target_k:
        raise UnsatisfiableConstructionError(
            f"Merge reached K={k}, short of target {target_k} under level-{level} caps",
            achieved_k=k,
            profile=RateProfile(mask),
        )
    return RateProfile(mask)
