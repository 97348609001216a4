"""Set-function families, f^max, contractions and structural verifiers.

Every function maps bit-set subsets of ``{0..n-1}`` to floats with
``f(0) == 0``.  ``eval_many`` is the vectorised path used for full value
tables; ``table()`` and ``fmax_table()`` are cached on the (immutable)
function object.
"""
from __future__ import annotations

from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .core import MAX_OUTCOME_BITS, as_mask, lex_key, member_matrix, members, outcome_arrays, popcount
from .errors import LimitError, PreconditionError

MONOTONE_SUBMODULAR = "monotone-submodular"
SUBMODULAR = "submodular"
XOS = "xos"
ARBITRARY = "arbitrary"
KINDS = (MONOTONE_SUBMODULAR, SUBMODULAR, XOS, ARBITRARY)

TABLE_MAX_N = 20
VERIFY_MAX_N = 12
TOL = 1e-9


class SetFunction:
    """Base class.  Subclasses implement ``eval_many`` (or ``eval``)."""

    kind = ARBITRARY

    def __init__(self, n: int, kind: str | None = None):
        if kind is not None:
            if kind not in KINDS:
                raise PreconditionError(f"unknown class tag {kind!r}")
            self.kind = kind
        self.n = int(n)

    def eval(self, S) -> float:
        return float(self.eval_many(np.array([as_mask(S)], dtype=np.int64))[0])

    def eval_many(self, masks: np.ndarray) -> np.ndarray:
        return np.array([self.eval(int(m)) for m in masks], dtype=np.float64)

    def __call__(self, S) -> float:
        return self.eval(S)

    @property
    def monotone(self) -> bool:
        return self.kind in (MONOTONE_SUBMODULAR, XOS)

    @property
    def submodular(self) -> bool:
        return self.kind in (MONOTONE_SUBMODULAR, SUBMODULAR)

    def table(self) -> np.ndarray:
        """Values of f on all ``2**n`` subsets, indexed by mask."""
        return self._table

    @cached_property
    def _table(self) -> np.ndarray:
        if self.n > TABLE_MAX_N:
            raise LimitError(f"n={self.n} too large for a full value table (cap {TABLE_MAX_N})")
        out = np.empty(1 << self.n, dtype=np.float64)
        chunk = 1 << 16
        for lo in range(0, 1 << self.n, chunk):
            hi = min(lo + chunk, 1 << self.n)
            out[lo:hi] = self.eval_many(np.arange(lo, hi, dtype=np.int64))
        out.flags.writeable = False
        return out

    def fmax_table(self) -> np.ndarray:
        """``f^max`` on all subsets via a subset-max sweep, one bit at a time."""
        return self._fmax_table

    @cached_property
    def _fmax_table(self) -> np.ndarray:
        t = np.array(self.table(), copy=True)
        for i in range(self.n):
            view = t.reshape(-1, 2, 1 << i)
            np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
        t.flags.writeable = False
        return t

    def to_dict(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no JSON descriptor")


def _onehot(labels: Sequence[int], size: int) -> np.ndarray:
    m = np.zeros((len(labels), size), dtype=np.float64)
    for e, lab in enumerate(labels):
        m[e, lab] = 1.0
    return m


class TableFunction(SetFunction):
    """Explicit value for every subset (n <= 16)."""

    def __init__(self, values: Sequence[float], kind: str = ARBITRARY):
        values = np.asarray(values, dtype=np.float64)
        n = int(round(np.log2(len(values)))) if len(values) else -1
        if n < 0 or len(values) != 1 << n:
            raise PreconditionError("table length must be a power of two")
        if n > 16:
            raise LimitError(f"table functions are capped at n=16, got {n}")
        if values[0] != 0.0:
            raise PreconditionError("table value of the empty set must be 0")
        super().__init__(n, kind)
        self.values = values
        self.values.flags.writeable = False

    @classmethod
    def from_function(cls, f: SetFunction, kind: str | None = None) -> "TableFunction":
        return cls(f.table(), kind or f.kind)

    @classmethod
    def from_dict_values(cls, n: int, values: dict, kind: str = ARBITRARY) -> "TableFunction":
        """Build from a sparse ``{subset: value}`` map; missing subsets are 0."""
        arr = np.zeros(1 << n)
        for S, v in values.items():
            arr[as_mask(S)] = v
        return cls(arr, kind)

    def eval_many(self, masks):
        return self.values[np.asarray(masks, dtype=np.int64)]

    def to_dict(self):
        return {"type": "table", "kind": self.kind, "values": self.values.tolist()}


class CoverageFunction(SetFunction):
    """Weighted coverage: total weight of items covered by the chosen sets."""

    kind = MONOTONE_SUBMODULAR

    def __init__(self, sets: Sequence[Sequence[int]], weights: Sequence[float]):
        weights = np.asarray(weights, dtype=np.float64)
        if (weights < 0).any():
            raise PreconditionError("coverage weights must be non-negative")
        super().__init__(len(sets))
        self.sets = tuple(tuple(sorted(set(int(i) for i in s))) for s in sets)
        self.weights = weights
        inc = np.zeros((self.n, len(weights)), dtype=np.float64)
        for e, items in enumerate(self.sets):
            for i in items:
                if not 0 <= i < len(weights):
                    raise PreconditionError(f"element {e} covers unknown item {i}")
                inc[e, i] = 1.0
        self._inc = inc

    def eval_many(self, masks):
        covered = member_matrix(masks, self.n).astype(np.float64) @ self._inc > 0
        return covered.astype(np.float64) @ self.weights

    def to_dict(self):
        return {"type": "coverage", "sets": [list(s) for s in self.sets],
                "weights": self.weights.tolist()}


class XosFunction(SetFunction):
    """Max of non-negative linear functions: ``f(S) = max_i sum_{e in S} a[i][e]``."""

    kind = XOS

    def __init__(self, coefficients, kind: str | None = None):
        a = np.atleast_2d(np.asarray(coefficients, dtype=np.float64))
        if a.size == 0 or a.shape[0] < 1:
            raise PreconditionError("XOS width must be at least 1")
        if (a < 0).any():
            raise PreconditionError("XOS coefficients must be non-negative")
        super().__init__(a.shape[1], kind)
        self.a = a
        self.a.flags.writeable = False

    @property
    def width(self) -> int:
        return self.a.shape[0]

    def eval_many(self, masks):
        if self.n == 0:
            return np.zeros(len(masks))
        return (member_matrix(masks, self.n).astype(np.float64) @ self.a.T).max(axis=1)

    def to_dict(self):
        return {"type": "xos", "kind": self.kind, "coefficients": self.a.tolist()}


def modular(weights: Sequence[float]) -> XosFunction:
    """Non-negative linear function as a width-1 XOS function."""
    return XosFunction([list(weights)], kind=MONOTONE_SUBMODULAR)


def unit_demand(weights: Sequence[float]) -> XosFunction:
    """``f(S) = max_{e in S} w_e``; width-n XOS and monotone submodular."""
    n = len(weights)
    a = np.zeros((max(n, 1), n))
    for e, w in enumerate(weights):
        a[e, e] = w
    return XosFunction(a, kind=MONOTONE_SUBMODULAR)


class PartitionRankFunction(SetFunction):
    """Rank of a partition matroid: ``sum_j min(|S ∩ part_j|, cap_j)``."""

    kind = MONOTONE_SUBMODULAR

    def __init__(self, parts: Sequence[int], capacities: Sequence[int] | None = None):
        parts = [int(x) for x in parts]
        num = max(parts) + 1 if parts else 0
        caps = [1] * num if capacities is None else [int(c) for c in capacities]
        if len(caps) < num or min(caps, default=0) < 0:
            raise PreconditionError("need a non-negative capacity for every part")
        super().__init__(len(parts))
        self.parts = tuple(parts)
        self.capacities = tuple(caps)
        self._onehot = _onehot(parts, len(caps))

    def eval_many(self, masks):
        counts = member_matrix(masks, self.n).astype(np.float64) @ self._onehot
        return np.minimum(counts, np.asarray(self.capacities, dtype=np.float64)).sum(axis=1)

    def to_dict(self):
        return {"type": "partition_rank", "parts": list(self.parts),
                "capacities": list(self.capacities)}


class CutFunction(SetFunction):
    """Weighted cut of an undirected graph on the ground set."""

    kind = SUBMODULAR

    def __init__(self, n: int, edges: Sequence[tuple[int, int, float]]):
        super().__init__(n)
        clean = []
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if w < 0 or not (0 <= u < n and 0 <= v < n) or u == v:
                raise PreconditionError(f"bad cut edge {(u, v, w)}")
            clean.append((u, v, w))
        self.edges = tuple(clean)

    def eval_many(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        out = np.zeros(len(masks))
        for u, v, w in self.edges:
            out += w * (((masks >> u) ^ (masks >> v)) & 1)
        return out

    def to_dict(self):
        return {"type": "cut", "n": self.n, "edges": [list(e) for e in self.edges]}


class AllTypesFunction(SetFunction):
    """1 if every type has a member in S, else 0.  Monotone, not submodular."""

    def __init__(self, types: Sequence[int]):
        types = [int(t) for t in types]
        if not types:
            raise PreconditionError("all-types function needs at least one element")
        super().__init__(len(types))
        self.types = tuple(types)
        self.num_types = max(types) + 1
        self._onehot = _onehot(types, self.num_types)

    @property
    def monotone(self) -> bool:
        return True

    def eval_many(self, masks):
        counts = member_matrix(masks, self.n).astype(np.float64) @ self._onehot
        return (counts > 0).all(axis=1).astype(np.float64)

    def to_dict(self):
        return {"type": "all_types", "types": list(self.types)}


class ContractedFunction(SetFunction):
    """``g(T) = f(base | T) - f(base)``."""

    def __init__(self, f: SetFunction, base: int):
        kind = MONOTONE_SUBMODULAR if f.kind == MONOTONE_SUBMODULAR else ARBITRARY
        super().__init__(f.n, kind)
        self.f = f
        self.base = base
        self._offset = f.eval(base)

    def eval_many(self, masks):
        return self.f.eval_many(np.asarray(masks, dtype=np.int64) | self.base) - self._offset


def contract(f: SetFunction, base) -> SetFunction:
    """The contracted (marginal) function ``f_base``."""
    base = as_mask(base)
    if base == 0:
        return f
    return ContractedFunction(f, base)


# ---------------------------------------------------------------- f^max

def submasks(S: int) -> np.ndarray:
    """All submasks of ``S`` (doubling order, starting at 0)."""
    return outcome_arrays(S, [0.5] * (S.bit_length()))[0]


def fmax(f: SetFunction, S) -> float:
    """``max_{T ⊆ S} f(T)``."""
    S = as_mask(S)
    if f.n <= TABLE_MAX_N:
        if popcount(S) > MAX_OUTCOME_BITS:
            raise LimitError(f"|S|={popcount(S)} exceeds cap {MAX_OUTCOME_BITS}")
        return float(f.fmax_table()[S])
    return float(f.eval_many(submasks(S)).max())


def fmax_witness(f: SetFunction, S) -> tuple[float, int]:
    """``f^max(S)`` with the lexicographically smallest maximising subset."""
    S = as_mask(S)
    subs = submasks(S)
    vals = f.eval_many(subs)
    best = vals.max()
    cands = [int(m) for m in subs[vals >= best - 1e-12]]
    return float(best), min(cands, key=lex_key)


def fmax_half_estimate(f: SetFunction, S, exact: bool = True, samples: int = 10_000,
                       seed: int | None = None) -> float:
    """``E_{R ~ S(1/2)}[f(R)]``, exactly or by seeded sampling."""
    S = as_mask(S)
    if exact:
        if popcount(S) > MAX_OUTCOME_BITS:
            raise LimitError(f"|S|={popcount(S)} exceeds cap {MAX_OUTCOME_BITS}")
        subs = submasks(S)
        vals = f.table()[subs] if f.n <= TABLE_MAX_N else f.eval_many(subs)
        return float(vals.mean())
    if seed is None:
        raise PreconditionError("sampled mode needs an explicit seed")
    from .core import GroundSet, sample_subsets
    draws = sample_subsets(S, GroundSet([0.5] * f.n), seed, samples)
    return float(f.eval_many(draws).mean())


# ------------------------------------------------------------ verifiers

class Verdict(NamedTuple):
    ok: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.ok


def _verify_table(f: SetFunction) -> np.ndarray:
    if f.n > VERIFY_MAX_N:
        raise LimitError(f"verifiers are capped at n={VERIFY_MAX_N}, got {f.n}")
    return f.table()


def verify_nonnegative(f: SetFunction, tol: float = TOL) -> Verdict:
    t = _verify_table(f)
    bad = np.flatnonzero(t < -tol)
    return Verdict(True) if len(bad) == 0 else Verdict(False, (int(bad[0]),))


def verify_monotone(f: SetFunction, tol: float = TOL) -> Verdict:
    """Checks every cover ``S ⊂ S+e``; witness is ``(S, S+e)``."""
    t = _verify_table(f)
    allS = np.arange(1 << f.n, dtype=np.int64)
    first = None
    for e in range(f.n):
        bit = 1 << e
        S = allS[(allS & bit) == 0]
        bad = S[t[S] > t[S | bit] + tol]
        if len(bad) and (first is None or bad[0] < first[0]):
            first = (int(bad[0]), int(bad[0]) | bit)
    return Verdict(True) if first is None else Verdict(False, first)


def verify_submodular(f: SetFunction, tol: float = TOL) -> Verdict:
    """Diminishing returns on every ``S`` and pair ``a, b ∉ S``.

    This local form is equivalent to the lattice inequality; the witness
    ``(S+a, S+b)`` violates ``f(A∪B) + f(A∩B) <= f(A) + f(B)`` directly.
    """
    t = _verify_table(f)
    allS = np.arange(1 << f.n, dtype=np.int64)
    first = None
    for a in range(f.n):
        for b in range(a + 1, f.n):
            ba, bb = 1 << a, 1 << b
            S = allS[(allS & (ba | bb)) == 0]
            bad = S[t[S | ba | bb] + t[S] > t[S | ba] + t[S | bb] + tol]
            if len(bad) and (first is None or bad[0] < first[0]):
                first = (int(bad[0]), int(bad[0]) | ba, int(bad[0]) | bb)
    return Verdict(True) if first is None else Verdict(False, first[1:])


def xos_of_fmax(f: XosFunction, tol: float = TOL) -> Verdict:
    """For monotone XOS, ``f^max`` coincides with ``f`` on every subset."""
    t = _verify_table(f)
    bad = np.flatnonzero(np.abs(f.fmax_table() - t) > tol)
    return Verdict(True) if len(bad) == 0 else Verdict(False, (int(bad[0]),))


def audit(f: SetFunction, max_n: int = 10) -> list[str]:
    """Problems between ``f.kind`` and what the verifiers observe.

    Returns an empty list when the tag is consistent or ``n > max_n``.
    """
    if f.n > max_n:
        return []
    problems = []
    v = verify_nonnegative(f)
    if not v:
        problems.append(f"negative value at {members(v.witness[0])}")
    if f.kind in (MONOTONE_SUBMODULAR, XOS) or f.monotone:
        v = verify_monotone(f)
        if not v:
            problems.append(f"not monotone: {[members(s) for s in v.witness]}")
    if f.kind in (MONOTONE_SUBMODULAR, SUBMODULAR):
        v = verify_submodular(f)
        if not v:
            problems.append(f"not submodular: {[members(s) for s in v.witness]}")
    return problems


def expected_fmax(f: SetFunction, S, probs: Sequence[float]) -> float:
    """``E_{R ~ S(p)}[f^max(R)]`` by exact outcome enumeration."""
    masks, weights = outcome_arrays(as_mask(S), probs)
    if f.n <= TABLE_MAX_N:
        vals = f.fmax_table()[masks]
    else:
        vals = np.array([fmax(f, int(m)) for m in masks])
    return float(weights @ vals)
