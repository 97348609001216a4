"""Problem instances and generators for lower-bound and random families."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import CardinalityConstraint, ConstraintAutomaton, PartitionMatroidConstraint, PathWitnessConstraint
from .core import GroundSet, make_rng
from .errors import PreconditionError
from .functions import (AllTypesFunction, CoverageFunction, CutFunction, PartitionRankFunction, SetFunction,
                        XosFunction, audit)

AUDIT_MAX_N = 10


@dataclass(frozen=True)
class Instance:
    ground: GroundSet
    objective: SetFunction
    constraint: ConstraintAutomaton
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.ground.n
        if self.objective.n != n or self.constraint.n != n:
            raise PreconditionError(
                f"size mismatch: ground {n}, objective {self.objective.n}, constraint {self.constraint.n}")
        problems = audit(self.objective, AUDIT_MAX_N)
        if problems:
            raise PreconditionError(f"objective tagged {self.objective.kind!r} fails audit: {problems}")

    @property
    def n(self) -> int:
        return self.ground.n


def gen_partition_lb(k: int, part_size: int | None = None, p: float | None = None,
                     budget: int | None = None) -> Instance:
    """``k`` parts of ``part_size`` elements, partition-matroid rank objective
    (one unit per part hit), cardinality budget.  Defaults: ``k**2``, ``1/k``, ``k**2``."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    part_size = k * k if part_size is None else part_size
    p = 1.0 / k if p is None else p
    budget = k * k if budget is None else budget
    parts = [j for j in range(k) for _ in range(part_size)]
    n = len(parts)
    return Instance(GroundSet([p] * n), PartitionRankFunction(parts), CardinalityConstraint(n, budget),
                    {"family": "partition", "k": k, "part_size": part_size, "p": p, "budget": budget})


def xos_tree_function(tree: PathWitnessConstraint) -> XosFunction:
    """One 0/1 linear function per root-leaf path: ``f(S) = max_l |P_l ∩ S|``."""
    a = np.zeros((len(tree.leaves), tree.n))
    for i in range(len(tree.leaves)):
        mask = tree.path_edges(i)
        for e in range(tree.n):
            if mask >> e & 1:
                a[i, e] = 1.0
    return XosFunction(a)


def gen_xos_tree_lb(k: int, depth: int, variant: str = "path_witness",
                    budget: int | None = None) -> Instance:
    """Edges of a ``k``-ary tree as elements with ``p = 1/k`` and the
    longest-active-path XOS objective.  ``variant`` picks the path-witness
    constraint or a cardinality budget (default ``k**2``)."""
    tree = PathWitnessConstraint(k, depth)
    f = xos_tree_function(tree)
    if variant == "path_witness":
        c: ConstraintAutomaton = tree
    elif variant == "cardinality":
        c = CardinalityConstraint(tree.n, k * k if budget is None else budget)
    else:
        raise PreconditionError(f"unknown variant {variant!r}")
    return Instance(GroundSet([1.0 / k] * tree.n), f, c,
                    {"family": "xos_tree", "k": k, "depth": depth, "variant": variant})


def gen_alltypes_lb(k: int, copies: int | None = None, p: float = 0.5,
                    budget: int | None = None) -> Instance:
    """``k`` types with ``copies`` items each; value 1 iff every type has an
    active item.  Defaults: ``copies = k``, ``budget = 4k``."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    copies = k if copies is None else copies
    budget = 4 * k if budget is None else budget
    types = [t for t in range(k) for _ in range(copies)]
    n = len(types)
    return Instance(GroundSet([p] * n), AllTypesFunction(types), CardinalityConstraint(n, budget),
                    {"family": "all_types", "k": k, "copies": copies, "p": p, "budget": budget})


def alltypes_per_type_plan(inst: Instance, per_type: int) -> list[int]:
    """The first ``per_type`` items of every type."""
    f = inst.objective
    taken: dict[int, int] = {}
    plan = []
    for e, t in enumerate(f.types):
        if taken.get(t, 0) < per_type:
            taken[t] = taken.get(t, 0) + 1
            plan.append(e)
    return plan


def _random_probs(rng, n, lo=0.1, hi=0.9):
    return rng.uniform(lo, hi, size=n).round(6).tolist()


def _random_constraint(rng, n, params) -> ConstraintAutomaton:
    kind = params.get("constraint", "cardinality")
    if kind == "cardinality":
        k = params.get("k")
        return CardinalityConstraint(n, int(rng.integers(1, n + 1)) if k is None else k)
    if kind == "partition_matroid":
        num = params.get("parts", max(1, min(3, n)))
        labels = [int(x) for x in rng.integers(0, num, size=n)]
        labels[:num] = list(range(num))[:n]
        caps = [int(rng.integers(1, 3)) for _ in range(num)]
        return PartitionMatroidConstraint(labels, caps)
    raise PreconditionError(f"unknown random constraint {kind!r}")


def gen_random(family: str, n: int, seed: int, params: dict | None = None) -> Instance:
    """Seeded random instance of ``family`` in {coverage, cut, xos}.

    ``params`` may set ``constraint`` (cardinality | partition_matroid),
    ``k``, ``items`` (coverage universe), ``density`` (cut edge prob),
    ``width`` (XOS), ``p_lo``/``p_hi``.
    """
    params = dict(params or {})
    if not 0 <= n <= 14:
        raise PreconditionError("random instances are capped at n=14")
    rng = make_rng(seed)
    probs = _random_probs(rng, n, params.get("p_lo", 0.1), params.get("p_hi", 0.9))
    if family == "coverage":
        items = params.get("items", max(2 * n, 1))
        weights = rng.uniform(0.1, 1.0, size=items).round(6).tolist()
        sets = []
        for _ in range(n):
            size = int(rng.integers(1, max(2, items // 2) + 1))
            sets.append(sorted(int(i) for i in rng.choice(items, size=min(size, items), replace=False)))
        f: SetFunction = CoverageFunction(sets, weights)
    elif family == "cut":
        density = params.get("density", 0.5)
        edges = [(u, v, round(float(rng.uniform(0.1, 1.0)), 6))
                 for u in range(n) for v in range(u + 1, n) if rng.random() < density]
        f = CutFunction(n, edges)
    elif family == "xos":
        width = params.get("width", 3)
        a = rng.uniform(0.0, 1.0, size=(width, n))
        a[rng.random((width, n)) < params.get("sparsity", 0.3)] = 0.0
        f = XosFunction(a.round(6))
    else:
        raise PreconditionError(f"unknown random family {family!r}")
    c = _random_constraint(rng, n, params)
    meta = {"family": family, "n": n, "seed": seed, **params}
    return Instance(GroundSet(probs), f, c, meta)
