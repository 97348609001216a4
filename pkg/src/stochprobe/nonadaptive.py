"""Non-adaptive probe plans: exact value, exact optimum, greedy and the
threshold/linear-oracle algorithm for width-W XOS objectives."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adaptive import Tree, alg_value
from .constraints import REJECT, CardinalityConstraint, PartitionMatroidConstraint
from .core import GroundSet, as_mask, lex_key, members, popcount
from .errors import PreconditionError, StructuralError
from .functions import MONOTONE_SUBMODULAR, SetFunction, XosFunction, expected_fmax, fmax_half_estimate

CONSERVATIVE_LAMBDA_SCALE = 1000.0
PRACTICAL_LAMBDA_SCALE = 2.0


@dataclass(frozen=True)
class ProbePlan:
    elements: tuple[int, ...]
    states: tuple = field(default=(), compare=False)

    @property
    def mask(self) -> int:
        return as_mask(self.elements)

    def __len__(self):
        return len(self.elements)


def make_plan(constraint, elements: Sequence[int]) -> ProbePlan:
    """Plan with its constraint state trace; raises if the order is infeasible."""
    state, trace, seen = constraint.initial, [constraint.initial], 0
    for e in elements:
        if seen >> e & 1:
            raise StructuralError(f"element {e} repeated in plan")
        seen |= 1 << e
        state = constraint.transition(state, e)
        if state is REJECT:
            raise StructuralError(f"plan {list(elements)} infeasible at element {e}")
        trace.append(state)
    return ProbePlan(tuple(int(e) for e in elements), tuple(trace))


def plan_for_set(constraint, S: int) -> ProbePlan:
    order = constraint.order_for(S)
    if order is None:
        raise StructuralError(f"no feasible order for {members(S)}")
    return make_plan(constraint, order)


def plan_value(plan, f: SetFunction, g: GroundSet) -> float:
    """``E_{A ~ X(p)}[f^max(A ∩ plan)]``; accepts a plan, a mask or indices."""
    S = plan.mask if isinstance(plan, ProbePlan) else as_mask(plan)
    return expected_fmax(f, S, g.probs)


def plan_value_half_surrogate(plan, f: SetFunction, g: GroundSet) -> float:
    """Surrogate for non-monotone f replacing ``f^max(A ∩ S)`` by
    ``E_{R ~ X(1/2)}[f(A ∩ S ∩ R)]`` (loses at most a factor 4)."""
    from .core import outcome_arrays
    S = plan.mask if isinstance(plan, ProbePlan) else as_mask(plan)
    masks, weights = outcome_arrays(S, g.probs)
    return float(sum(w * fmax_half_estimate(f, int(m)) for m, w in zip(masks, weights)))


def opt_nonadaptive(inst) -> tuple[float, ProbePlan]:
    """Best non-adaptive plan by enumeration.

    ``f^max`` is monotone, so the plan value is monotone in the probed set
    and only maximal feasible sets need scoring.  Ties go to fewer
    elements, then lexicographic order.
    """
    g, f, c = inst.ground, inst.objective, inst.constraint
    best_val, best_set = -math.inf, 0
    for S in c.enumerate_maximal_feasible():
        v = plan_value(S, f, g)
        if v > best_val + 1e-12:
            best_val, best_set = v, S
        elif v >= best_val - 1e-12 and (popcount(S), lex_key(S)) < (popcount(best_set), lex_key(best_set)):
            best_set = S
    return best_val, plan_for_set(c, best_set)


def natural_nonadaptive(t: Tree, f: SetFunction, g: GroundSet, constraint=None) -> float:
    """Value of probing the path of a leaf drawn from the tree's own distribution."""
    return alg_value(t, f, g, constraint)


def greedy_nonadaptive(inst, lazy: bool = True) -> tuple[float, ProbePlan]:
    """Greedy on ``g(S) = plan_value(S)`` under a cardinality or partition
    matroid constraint.  Requires a monotone submodular objective."""
    g, f, c = inst.ground, inst.objective, inst.constraint
    if f.kind != MONOTONE_SUBMODULAR:
        raise PreconditionError(f"greedy needs a monotone submodular objective, got {f.kind}")
    if not isinstance(c, (CardinalityConstraint, PartitionMatroidConstraint)):
        raise PreconditionError(f"greedy supports cardinality/partition matroid, got {type(c).__name__}")

    chosen, state, current = [], c.initial, 0.0
    S = 0

    def gain(e):
        return plan_value(S | 1 << e, f, g) - current

    if not lazy:
        while True:
            options = c.feasible_next(state, S)
            if not options:
                break
            gains = [(gain(e), e) for e in options]
            best = max(gains, key=lambda ge: (ge[0], -ge[1]))
            if best[0] <= 1e-12:
                break
            e = best[1]
            chosen.append(e)
            state = c.transition(state, e)
            S |= 1 << e
            current += best[0]
        current = plan_value(S, f, g)
        return current, make_plan(c, chosen)

    # Lazy evaluation: stale gains upper-bound fresh ones by submodularity.
    heap = [(-gain(e), e, 0) for e in range(g.n)]
    heapq.heapify(heap)
    rnd = 0
    while heap:
        neg, e, stamp = heapq.heappop(heap)
        if S >> e & 1 or c.transition(state, e) is REJECT:
            continue
        if stamp != rnd:
            heapq.heappush(heap, (-gain(e), e, rnd))
            continue
        if -neg <= 1e-12:
            break
        chosen.append(e)
        state = c.transition(state, e)
        S |= 1 << e
        current = plan_value(S, f, g)
        rnd += 1
    return current, make_plan(c, chosen)


def default_lambda(width: int, scale: float = CONSERVATIVE_LAMBDA_SCALE) -> float:
    """``scale * ln W``, with W clamped to 2 so width-1 inputs stay positive."""
    return scale * math.log(max(width, 2))


@dataclass
class XosResult:
    value: float
    plan: ProbePlan
    oracle_calls: int
    surrogate: float
    winner: str
    candidates: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.value, self.plan, self.oracle_calls))


def xos_algorithm1(inst, lam: float | None = None) -> XosResult:
    """Threshold candidates plus one linear-oracle call per linear function;
    the candidate with the best surrogate score is returned.

    ``lam`` defaults to ``1000 ln W``.  Threshold levels run over
    ``j = 0 .. 1 + ceil(log2 n)``.
    """
    g, f, c = inst.ground, inst.objective, inst.constraint
    if not isinstance(f, XosFunction):
        raise PreconditionError("algorithm needs an explicit XosFunction objective")
    if lam is None:
        lam = default_lambda(f.width)
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    n = g.n
    p = np.asarray(g.probs)
    peak = f.a.max(axis=0) if n else np.zeros(0)
    m = float((p * peak).max()) if n else 0.0
    levels = 1 + math.ceil(math.log2(n)) if n > 1 else 1

    calls = 0
    cands: dict[str, tuple[int, float]] = {}
    for i in range(f.width):
        S, _ = c.linear_oracle(p * f.a[i])
        calls += 1
        cands[f"S{i}"] = (S, float(sum(p[e] * f.a[i, e] for e in members(S))))
    for j in range(levels + 1):
        thresh = (2 ** j) * m / lam
        b = np.where(peak >= thresh, p, 0.0)
        T, _ = c.linear_oracle(b)
        calls += 1
        cands[f"T{j}"] = (T, thresh * min(float(sum(b[e] for e in members(T))), 1.0))

    winner = None
    for label, (_, v) in cands.items():
        if winner is None or v > cands[winner][1] + 1e-12:
            winner = label
    S, surrogate = cands[winner]
    return XosResult(plan_value(S, f, g), plan_for_set(c, S), calls, surrogate, winner, cands)


def expected_oracle_calls(width: int, n: int) -> int:
    return width + (math.ceil(math.log2(n)) if n > 1 else 0) + 2
