"""Adaptive strategy trees: evaluation, structure and the optimal DP."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .constraints import REJECT, ConstraintAutomaton
from .core import GroundSet, make_rng, members
from .errors import LimitError, StateBudgetError, StructuralError
from .functions import TABLE_MAX_N, SetFunction, expected_fmax, fmax

MAX_DP_N = 14
DEFAULT_MAX_STATES = 2_000_000


@dataclass(frozen=True, eq=False)
class Leaf:
    def __repr__(self):
        return "LEAF"


LEAF = Leaf()


@dataclass(frozen=True, eq=False)
class Node:
    elt: int
    yes: "Tree"
    no: "Tree"


Tree = Union[Node, Leaf]


def is_leaf(t: Tree) -> bool:
    return isinstance(t, Leaf)


def probe(e: int, yes: Tree = LEAF, no: Tree = LEAF) -> Node:
    return Node(e, yes, no)


def chain(elements, yes: Tree = LEAF) -> Tree:
    """Stem probing ``elements`` in order; every yes-arc leads to ``yes``."""
    t: Tree = LEAF
    for e in reversed(list(elements)):
        t = Node(e, yes, t)
    return t


def tree_equal(a: Tree, b: Tree) -> bool:
    if is_leaf(a) or is_leaf(b):
        return is_leaf(a) and is_leaf(b)
    return a.elt == b.elt and tree_equal(a.yes, b.yes) and tree_equal(a.no, b.no)


def subtrees(t: Tree) -> Iterator[Tree]:
    """Every node's subtree, pre-order (shared subtrees repeat)."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if not is_leaf(u):
            stack.append(u.no)
            stack.append(u.yes)


def size(t: Tree) -> int:
    """Number of internal (probing) nodes."""
    return sum(1 for u in subtrees(t) if not is_leaf(u))


def validate_tree(t: Tree, n: int, constraint: ConstraintAutomaton | None = None) -> None:
    """Raise ``StructuralError`` on repeated or out-of-range elements or on a
    root-leaf path the constraint rejects."""
    stack = [(t, 0, constraint.initial if constraint is not None else None)]
    while stack:
        u, path, state = stack.pop()
        if is_leaf(u):
            continue
        e = u.elt
        if not 0 <= e < n:
            raise StructuralError(f"node probes element {e} outside ground set of size {n}")
        if path >> e & 1:
            raise StructuralError(f"element {e} appears twice on one root-leaf path")
        if constraint is not None:
            state = constraint.transition(state, e)
            if state is REJECT:
                raise StructuralError(f"path {members(path)} + [{e}] violates the constraint")
        stack.append((u.yes, path | 1 << e, state))
        stack.append((u.no, path | 1 << e, state))


def leaves(t: Tree, g: GroundSet) -> list[tuple[float, int, int]]:
    """``(probability, probed set, active set)`` for each leaf under pi_T."""
    out = []
    stack = [(t, 1.0, 0, 0)]
    while stack:
        u, prob, path, active = stack.pop()
        if is_leaf(u):
            out.append((prob, path, active))
            continue
        e, p = u.elt, g.probs[u.elt]
        bit = 1 << e
        stack.append((u.no, prob * (1.0 - p), path | bit, active))
        stack.append((u.yes, prob * p, path | bit, active | bit))
    return out


def _fmax_lookup(f: SetFunction):
    if f.n <= TABLE_MAX_N:
        table = f.fmax_table()
        return lambda S: float(table[S])
    cache: dict[int, float] = {}

    def look(S):
        if S not in cache:
            cache[S] = fmax(f, S)
        return cache[S]
    return look


def adap_value(t: Tree, f: SetFunction, g: GroundSet,
               constraint: ConstraintAutomaton | None = None) -> float:
    """``E_{leaf ~ pi_T}[f^max(active elements on the leaf's path)]``."""
    validate_tree(t, g.n, constraint)
    fm = _fmax_lookup(f)

    def walk(u, active):
        if is_leaf(u):
            return fm(active)
        p = g.probs[u.elt]
        return p * walk(u.yes, active | 1 << u.elt) + (1.0 - p) * walk(u.no, active)

    return walk(t, 0)


def adap_online_value(t: Tree, f: SetFunction, g: GroundSet, keep_prob: float = 0.5,
                      constraint: ConstraintAutomaton | None = None) -> float:
    """Expected ``f(kept)`` when each active element seen is kept w.p. ``keep_prob``."""
    validate_tree(t, g.n, constraint)
    table = f.table() if f.n <= TABLE_MAX_N else None
    val = (lambda S: float(table[S])) if table is not None else f.eval
    memo: dict[tuple[int, int], float] = {}

    def walk(u, kept):
        if is_leaf(u):
            return val(kept)
        key = (id(u), kept)
        if key in memo:
            return memo[key]
        e, p = u.elt, g.probs[u.elt]
        yes = keep_prob * walk(u.yes, kept | 1 << e) + (1.0 - keep_prob) * walk(u.yes, kept)
        out = p * yes + (1.0 - p) * walk(u.no, kept)
        memo[key] = out
        return out

    return walk(t, 0)


def alg_value(t: Tree, f: SetFunction, g: GroundSet,
              constraint: ConstraintAutomaton | None = None) -> float:
    """Natural non-adaptive value: draw a leaf from pi_T, then probe its path
    afresh and take ``f^max`` of what turns out active."""
    validate_tree(t, g.n, constraint)
    cache: dict[int, float] = {}
    total = 0.0
    for prob, path, _ in leaves(t, g):
        if prob == 0.0:
            continue
        if path not in cache:
            cache[path] = expected_fmax(f, path, g.probs)
        total += prob * cache[path]
    return total


@dataclass(frozen=True)
class StemView:
    nodes: tuple[Node, ...]
    subtrees: tuple[Tree, ...]

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(v.elt for v in self.nodes)

    def exit_probabilities(self, g: GroundSet) -> list[float]:
        """Probability of leaving the stem at each node, then of never leaving."""
        out, stay = [], 1.0
        for e in self.elements:
            out.append(stay * g.probs[e])
            stay *= 1.0 - g.probs[e]
        out.append(stay)
        return out


def stem(t: Tree) -> StemView:
    nodes = []
    while not is_leaf(t):
        nodes.append(t)
        t = t.no
    return StemView(tuple(nodes), tuple(v.yes for v in nodes))


def deepness(t: Tree) -> int:
    """Largest number of yes-arcs on any root-leaf path."""
    if is_leaf(t):
        return 0
    return max(1 + deepness(t.yes), deepness(t.no))


def depth(t: Tree) -> int:
    if is_leaf(t):
        return 0
    return 1 + max(depth(t.yes), depth(t.no))


def opt_adaptive(inst, max_states: int = DEFAULT_MAX_STATES) -> tuple[float, Tree]:
    """Optimal adaptive value and a tree attaining it.

    Memoised recursion over (constraint state, probed set, active set).  At
    every state the strategy may stop and take ``f^max(active)``; a probe
    replaces stopping only if it is better by more than 1e-12, and among
    probes the lowest index wins ties.
    """
    g, f, c = inst.ground, inst.objective, inst.constraint
    n = g.n
    if n > MAX_DP_N:
        raise LimitError(f"adaptive DP capped at n={MAX_DP_N}, got {n}")
    fm = f.fmax_table().tolist()
    probs = g.probs
    memo: dict[tuple, tuple[float, int | None]] = {}

    def V(state, probed, active):
        key = (state, probed, active)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        if len(memo) >= max_states:
            raise StateBudgetError(f"adaptive DP exceeded {max_states} states")
        best, choice = fm[active], None
        for e in range(n):
            bit = 1 << e
            if probed & bit:
                continue
            nxt = c.transition(state, e)
            if nxt is REJECT:
                continue
            p = probs[e]
            val = p * V(nxt, probed | bit, active | bit) + (1.0 - p) * V(nxt, probed | bit, active)
            if val > best + 1e-12:
                best, choice = val, e
        memo[key] = (best, choice)
        return best

    value = V(c.initial, 0, 0)
    built: dict[tuple, Tree] = {}

    def build(state, probed, active):
        key = (state, probed, active)
        if key in built:
            return built[key]
        e = memo[key][1]
        if e is None:
            node: Tree = LEAF
        else:
            nxt, bit = c.transition(state, e), 1 << e
            node = Node(e, build(nxt, probed | bit, active | bit), build(nxt, probed | bit, active))
        built[key] = node
        return node

    return value, build(c.initial, 0, 0)


def random_tree(inst, seed: int, max_nodes: int, stop_prob: float = 0.2) -> Tree:
    """Seeded random valid tree with at most ``max_nodes`` probing nodes."""
    rng = make_rng(seed)
    c = inst.constraint

    def gen(state, probed, budget):
        if budget <= 0 or rng.random() < stop_prob:
            return LEAF
        options = c.feasible_next(state, probed)
        if not options:
            return LEAF
        e = int(options[rng.integers(len(options))])
        rest = budget - 1
        to_yes = int(rng.integers(rest + 1))
        nxt, bit = c.transition(state, e), 1 << e
        return Node(e, gen(nxt, probed | bit, to_yes), gen(nxt, probed | bit, rest - to_yes))

    return gen(c.initial, 0, max_nodes)


def tree_to_json(t: Tree):
    if is_leaf(t):
        return "leaf"
    return {"elt": t.elt, "yes": tree_to_json(t.yes), "no": tree_to_json(t.no)}


def tree_from_json(obj) -> Tree:
    if obj == "leaf":
        return LEAF
    try:
        return Node(int(obj["elt"]), tree_from_json(obj["yes"]), tree_from_json(obj["no"]))
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed tree node: {obj!r}") from exc
