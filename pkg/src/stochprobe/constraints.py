"""Prefix-closed probing constraints as deterministic sequence automata.

A constraint exposes ``initial`` and ``transition(state, e)``; the latter
returns the next state or ``REJECT``.  Every state reachable by accepted
transitions is accepting, which is exactly prefix-closure.  States are
hashable so the adaptive DP can memoise on them.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from typing import Hashable, Iterable, Sequence

import numpy as np

from .core import lex_key, member_matrix, members, popcount
from .errors import LimitError, PreconditionError

REJECT = None
MAX_EXHAUSTIVE_N = 14


def _best_set(cands: Iterable[int], w: np.ndarray, n: int) -> tuple[int, float]:
    """Highest weight; ties go to fewer elements, then lexicographic order."""
    cands = np.fromiter(cands, dtype=np.int64)
    vals = member_matrix(cands, n).astype(np.float64) @ w if n else np.zeros(len(cands))
    best = vals.max()
    tied = [int(c) for c in cands[vals >= best - 1e-12]]
    S = min(tied, key=lambda m: (popcount(m), lex_key(m)))
    return S, float(sum(w[e] for e in members(S)))


def _maximal(sets: Iterable[int]) -> list[int]:
    uniq = sorted(set(sets), key=popcount, reverse=True)
    kept: list[int] = []
    for s in uniq:
        if not any(s & k == s for k in kept):
            kept.append(s)
    return sorted(kept, key=lex_key)


class ConstraintAutomaton:
    order_independent = False

    def __init__(self, n: int):
        self.n = int(n)

    @property
    def initial(self) -> Hashable:
        raise NotImplementedError

    def transition(self, state, e: int):
        raise NotImplementedError

    def feasible_next(self, state, probed: int) -> list[int]:
        return [e for e in range(self.n)
                if not probed >> e & 1 and self.transition(state, e) is not REJECT]

    def run(self, seq: Sequence[int]):
        """Final state after ``seq``, or ``REJECT``; repeats are rejected."""
        state, seen = self.initial, 0
        for e in seq:
            if seen >> e & 1 or not 0 <= e < self.n:
                return REJECT
            seen |= 1 << e
            state = self.transition(state, e)
            if state is REJECT:
                return REJECT
        return state

    def accepts(self, seq: Sequence[int]) -> bool:
        return self.run(seq) is not REJECT

    def _require_small(self):
        if self.n > MAX_EXHAUSTIVE_N:
            raise LimitError(f"exhaustive search capped at n={MAX_EXHAUSTIVE_N}, got {self.n}")

    def feasible_sets(self) -> set[int]:
        """Every probe set reachable by some accepted sequence."""
        self._require_small()
        start = (self.initial, 0)
        seen = {start}
        queue = deque([start])
        while queue:
            state, probed = queue.popleft()
            for e in self.feasible_next(state, probed):
                nxt = (self.transition(state, e), probed | 1 << e)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return {probed for _, probed in seen}

    def enumerate_maximal_feasible(self) -> list[int]:
        return _maximal(self.feasible_sets())

    def linear_oracle(self, w) -> tuple[int, float]:
        """Feasible set maximising ``sum_{e in S} w[e]`` for ``w >= 0``."""
        w = self._weights(w)
        return _best_set(self.feasible_sets(), w, self.n)

    def _weights(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.n,):
            raise PreconditionError(f"expected {self.n} weights, got shape {w.shape}")
        if (w < 0).any():
            raise PreconditionError("linear oracle weights must be non-negative")
        return w

    def order_for(self, S: int) -> tuple[int, ...] | None:
        """Some accepted ordering of exactly the elements of ``S``."""
        if self.order_independent:
            seq = tuple(members(S))
            return seq if self.accepts(seq) else None
        failed = set()

        def dfs(state, remaining):
            if remaining == 0:
                return ()
            if (state, remaining) in failed:
                return None
            for e in members(remaining):
                nxt = self.transition(state, e)
                if nxt is REJECT:
                    continue
                rest = dfs(nxt, remaining & ~(1 << e))
                if rest is not None:
                    return (e,) + rest
            failed.add((state, remaining))
            return None

        return dfs(self.initial, S)

    def to_dict(self) -> dict:
        raise NotImplementedError


class CardinalityConstraint(ConstraintAutomaton):
    """At most ``k`` probes; state is the number probed so far."""

    order_independent = True

    def __init__(self, n: int, k: int):
        if k < 0:
            raise PreconditionError("cardinality budget must be >= 0")
        super().__init__(n)
        self.k = int(k)

    @property
    def initial(self):
        return 0

    def transition(self, state, e):
        return state + 1 if state < self.k else REJECT

    def feasible_sets(self):
        self._require_small()
        out = set()
        for r in range(min(self.k, self.n) + 1):
            for combo in itertools.combinations(range(self.n), r):
                out.add(sum(1 << e for e in combo))
        return out

    def enumerate_maximal_feasible(self):
        self._require_small()
        r = min(self.k, self.n)
        return sorted((sum(1 << e for e in c) for c in itertools.combinations(range(self.n), r)),
                      key=lex_key)

    def linear_oracle(self, w):
        w = self._weights(w)
        ranked = sorted((e for e in range(self.n) if w[e] > 0), key=lambda e: (-w[e], e))
        S = sum(1 << e for e in ranked[: self.k])
        return S, float(sum(w[e] for e in members(S)))

    def to_dict(self):
        return {"type": "cardinality", "k": self.k}


class PartitionMatroidConstraint(ConstraintAutomaton):
    """Per-part probe capacities; state is the tuple of per-part counts."""

    order_independent = True

    def __init__(self, parts: Sequence[int], capacities: Sequence[int]):
        parts = [int(x) for x in parts]
        caps = [int(c) for c in capacities]
        if parts and max(parts) >= len(caps):
            raise PreconditionError("every part label needs a capacity")
        if any(c < 0 for c in caps):
            raise PreconditionError("capacities must be >= 0")
        super().__init__(len(parts))
        self.parts = tuple(parts)
        self.capacities = tuple(caps)

    @property
    def initial(self):
        return (0,) * len(self.capacities)

    def transition(self, state, e):
        j = self.parts[e]
        if state[j] >= self.capacities[j]:
            return REJECT
        return state[:j] + (state[j] + 1,) + state[j + 1:]

    def _groups(self):
        groups = [[] for _ in self.capacities]
        for e, j in enumerate(self.parts):
            groups[j].append(e)
        return groups

    def enumerate_maximal_feasible(self):
        self._require_small()
        choices = [list(itertools.combinations(g, min(c, len(g))))
                   for g, c in zip(self._groups(), self.capacities)]
        out = [sum(1 << e for part in pick for e in part) for pick in itertools.product(*choices)]
        return sorted(out, key=lex_key)

    def linear_oracle(self, w):
        w = self._weights(w)
        S = 0
        for g, c in zip(self._groups(), self.capacities):
            ranked = sorted((e for e in g if w[e] > 0), key=lambda e: (-w[e], e))
            S |= sum(1 << e for e in ranked[:c])
        return S, float(sum(w[e] for e in members(S)))

    def to_dict(self):
        return {"type": "partition_matroid", "parts": list(self.parts),
                "capacities": list(self.capacities)}


class PathWitnessConstraint(ConstraintAutomaton):
    """Edges of a complete ``arity``-ary tree of the given depth.

    A probe set is feasible iff some root-leaf path touches an endpoint of
    every probed edge.  Vertices use heap numbering (root 0, children of
    ``v`` are ``arity*v+1 .. arity*v+arity``); edge ``e`` joins vertex
    ``e+1`` to its parent.  The state is the bit-set of surviving leaves.
    """

    order_independent = True

    def __init__(self, arity: int, depth: int):
        if arity < 1 or depth < 1:
            raise PreconditionError("arity and depth must be >= 1")
        self.arity, self.depth = int(arity), int(depth)
        n = sum(arity ** i for i in range(1, depth + 1))
        super().__init__(n)
        first_leaf = sum(arity ** i for i in range(depth))
        self.leaves = list(range(first_leaf, first_leaf + arity ** depth))
        self.paths = []
        for leaf in self.leaves:
            verts, v = {leaf}, leaf
            while v:
                v = (v - 1) // arity
                verts.add(v)
            self.paths.append(frozenset(verts))
        compat = []
        for e in range(n):
            child, parent = e + 1, e // arity
            compat.append(sum(1 << i for i, P in enumerate(self.paths)
                              if child in P or parent in P))
        self.compat = tuple(compat)

    def parent(self, e: int) -> int:
        return e // self.arity

    def path_edges(self, leaf_index: int) -> int:
        """Edges lying on root-leaf path ``leaf_index``."""
        P = self.paths[leaf_index]
        return sum(1 << e for e in range(self.n) if e + 1 in P)

    def witness_edges(self, leaf_index: int) -> int:
        """Edges with an endpoint on root-leaf path ``leaf_index``."""
        return sum(1 << e for e in range(self.n) if self.compat[e] >> leaf_index & 1)

    @property
    def initial(self):
        return (1 << len(self.leaves)) - 1

    def transition(self, state, e):
        nxt = state & self.compat[e]
        return nxt if nxt else REJECT

    def enumerate_maximal_feasible(self):
        self._require_small()
        return _maximal(self.witness_edges(i) for i in range(len(self.leaves)))

    def linear_oracle(self, w):
        w = self._weights(w)
        pos = sum(1 << e for e in range(self.n) if w[e] > 0)
        cands = {self.witness_edges(i) & pos for i in range(len(self.leaves))}
        return _best_set(cands, w, self.n)

    def to_dict(self):
        return {"type": "path_witness", "arity": self.arity, "depth": self.depth}


class PrefixDagConstraint(ConstraintAutomaton):
    """Explicit trie of allowed probe sequences (all prefixes implied)."""

    def __init__(self, n: int, sequences: Sequence[Sequence[int]]):
        super().__init__(n)
        self.children: list[dict[int, int]] = [{}]
        self.sequences = tuple(tuple(int(e) for e in s) for s in sequences)
        for seq in self.sequences:
            if len(set(seq)) != len(seq):
                raise PreconditionError(f"sequence {seq} repeats an element")
            node = 0
            for e in seq:
                if not 0 <= e < n:
                    raise PreconditionError(f"element {e} outside ground set")
                if e not in self.children[node]:
                    self.children.append({})
                    self.children[node][e] = len(self.children) - 1
                node = self.children[node][e]

    @property
    def initial(self):
        return 0

    def transition(self, state, e):
        return self.children[state].get(e, REJECT)

    def to_dict(self):
        return {"type": "prefix_dag", "n": self.n, "sequences": [list(s) for s in self.sequences]}


class BudgetPathConstraint(ConstraintAutomaton):
    """Orienteering-style budget: the walk from the start through the probed
    locations, in probe order, has length at most ``budget``.

    ``dist`` is an ``(n+1) x (n+1)`` matrix; index 0 is the start and
    element ``e`` sits at index ``e+1``.  State is ``(location, used)``.
    """

    def __init__(self, dist, budget: float):
        d = np.asarray(dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
            raise PreconditionError("dist must be a square matrix with a start row")
        if (d < 0).any():
            raise PreconditionError("distances must be non-negative")
        super().__init__(d.shape[0] - 1)
        self.dist = d
        self.budget = float(budget)

    @classmethod
    def from_points(cls, start, points, budget: float) -> "BudgetPathConstraint":
        locs = [tuple(start)] + [tuple(p) for p in points]
        d = [[math.dist(a, b) for b in locs] for a in locs]
        return cls(d, budget)

    @property
    def initial(self):
        return (0, 0.0)

    def transition(self, state, e):
        loc, used = state
        used = used + self.dist[loc, e + 1]
        if used > self.budget + 1e-12:
            return REJECT
        return (e + 1, used)

    def _held_karp(self) -> dict[tuple[int, int], float]:
        self._require_small()
        best = {(0, 0): 0.0}
        by_size = [[(0, 0)]]
        for _ in range(self.n):
            layer = {}
            for key in by_size[-1]:
                mask, loc = key
                used = best[key]
                for e in range(self.n):
                    if mask >> e & 1:
                        continue
                    u = used + self.dist[loc, e + 1]
                    if u > self.budget + 1e-12:
                        continue
                    nk = (mask | 1 << e, e + 1)
                    if u < layer.get(nk, math.inf):
                        layer[nk] = u
            if not layer:
                break
            for k, u in layer.items():
                if u < best.get(k, math.inf):
                    best[k] = u
            by_size.append(list(layer))
        return best

    def feasible_sets(self):
        return {mask for mask, _ in self._held_karp()}

    def order_for(self, S):
        best = self._held_karp()
        ends = [(u, loc) for (m, loc), u in best.items() if m == S]
        if not ends:
            return None
        _, loc = min(ends)
        seq, mask = [], S
        while mask:
            e = loc - 1
            seq.append(e)
            prev_mask = mask & ~(1 << e)
            target = best[(mask, loc)]
            loc = next(l for (m, l), u in best.items()
                       if m == prev_mask and abs(u + self.dist[l, e + 1] - target) <= 1e-9)
            mask = prev_mask
        return tuple(reversed(seq))

    def to_dict(self):
        return {"type": "budget_path", "dist": self.dist.tolist(), "budget": self.budget}
