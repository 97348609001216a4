"""Ground sets, bit-set subsets and activation outcome distributions.

Subsets are plain Python ints used as bit-sets: element ``e`` is a member
of ``S`` iff ``S >> e & 1``.  All stochastic helpers draw from a Philox
counter-based generator keyed by an explicit seed (and optional stream
ids), so every experiment is replayable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LimitError, PreconditionError

MAX_EXACT_N = 24
MAX_OUTCOME_BITS = 20


def as_mask(S) -> int:
    """Accept an int bit-set or an iterable of element indices."""
    if isinstance(S, (int, np.integer)):
        return int(S)
    mask = 0
    for e in S:
        mask |= 1 << int(e)
    return mask


def members(mask: int) -> list[int]:
    """Element indices of ``mask`` in ascending order."""
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def full_mask(n: int) -> int:
    return (1 << n) - 1


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key giving lexicographic order on ascending index tuples."""
    return tuple(members(mask))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox4x64 generator for ``seed``; ``stream`` ids split it into
    independent substreams (used for per-block Monte Carlo seeds)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GroundSet:
    """Elements ``0..n-1`` with independent activation probabilities."""

    probs: tuple[float, ...]

    def __init__(self, probs: Iterable[float]):
        probs = tuple(float(p) for p in probs)
        for e, p in enumerate(probs):
            if not 0.0 <= p <= 1.0:
                raise PreconditionError(f"probability of element {e} is {p}, outside [0, 1]")
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def p(self, e: int) -> float:
        return self.probs[e]

    def q(self, e: int) -> float:
        return 1.0 - self.probs[e]

    @property
    def mask(self) -> int:
        return full_mask(self.n)

    def check_subset(self, S: int) -> None:
        if S >> self.n:
            raise PreconditionError(f"subset {S:#b} uses indices >= n={self.n}")


def outcome_arrays(S: int, probs: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised outcome table of ``S(p)``: (submasks, probabilities).

    Submasks come out in the order obtained by doubling over the members of
    ``S`` in ascending index, starting from the empty set.
    """
    elems = members(S)
    if len(elems) > MAX_OUTCOME_BITS:
        raise LimitError(f"|S|={len(elems)} exceeds outcome enumeration cap {MAX_OUTCOME_BITS}")
    masks = np.zeros(1, dtype=np.int64)
    weights = np.ones(1, dtype=np.float64)
    for e in elems:
        p = probs[e]
        masks = np.concatenate([masks, masks | (1 << e)])
        weights = np.concatenate([weights * (1.0 - p), weights * p])
    return masks, weights


def enumerate_outcomes(S, g: GroundSet) -> list[tuple[int, float]]:
    """All subsets ``R`` of ``S`` with their probability under ``S(p)``."""
    S = as_mask(S)
    g.check_subset(S)
    masks, weights = outcome_arrays(S, g.probs)
    return [(int(m), float(w)) for m, w in zip(masks, weights)]


def sample_subset(S, g: GroundSet, seed: int) -> int:
    """One draw of ``R ~ S(p)``, reproducible from ``seed``."""
    S = as_mask(S)
    g.check_subset(S)
    u = make_rng(seed).random(g.n)
    R = 0
    for e in members(S):
        if u[e] < g.probs[e]:
            R |= 1 << e
    return R


def sample_subsets(S, g: GroundSet, seed: int, count: int) -> np.ndarray:
    """``count`` independent draws of ``R ~ S(p)`` as an int64 mask array."""
    S = as_mask(S)
    g.check_subset(S)
    u = make_rng(seed).random((count, g.n))
    active = u < np.asarray(g.probs)
    bits = np.array([(S >> e) & 1 for e in range(g.n)], dtype=bool)
    active &= bits
    weights = np.left_shift(np.int64(1), np.arange(g.n, dtype=np.int64))
    return (active.astype(np.int64) * weights).sum(axis=1)


def member_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    """Boolean (len(masks), n) membership matrix."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
