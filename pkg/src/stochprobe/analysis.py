"""Numeric checks of standalone inequalities, the path concentration
experiment and the adaptivity-gap report harness."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .adaptive import Tree, alg_value, adap_value, is_leaf, opt_adaptive
from .constraints import CardinalityConstraint, PartitionMatroidConstraint
from .core import as_mask, make_rng, members, outcome_arrays
from .errors import PreconditionError, TheoremViolation
from .functions import MONOTONE_SUBMODULAR, SUBMODULAR, SetFunction, XosFunction
from .nonadaptive import PRACTICAL_LAMBDA_SCALE, default_lambda, greedy_nonadaptive, opt_nonadaptive, xos_algorithm1

TOOL_VERSION = "0.1.0"
REPORT_VERSION = 1


class Check(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


# ------------------------------------------------------------ stem sums

def stem_inequality(a: Sequence[float], tol: float = 1e-12) -> Check:
    """``sum_i a_i (prod_{j<i} b_j)^2`` against ``1/2 sum_i a_i prod_{j<i} b_j``."""
    lhs = rhs = 0.0
    prefix = 1.0
    for ai in a:
        if not 0.0 <= ai <= 1.0:
            raise PreconditionError(f"probability {ai} outside [0, 1]")
        lhs += ai * prefix * prefix
        rhs += ai * prefix
        prefix *= 1.0 - ai
    rhs *= 0.5
    return Check(lhs, rhs, lhs >= rhs - tol)


def stem_tightness_ratio(eps: float, m: int) -> float:
    """``lhs / sum_i a_i prod_{j<i} b_j`` for ``m`` equal entries ``eps``."""
    lhs, rhs = stem_inequality([eps] * m)[:2]
    return lhs / (2.0 * rhs)


class StemMass(NamedTuple):
    lhs: float
    rhs: float
    brute: float
    holds: bool


def _level_sums(values: Sequence[float], fn) -> float:
    """``∫_0^∞ fn(W_x) dx`` where ``W_x = {i : values[i] >= x}``, as a finite
    sum over the sorted distinct positive values."""
    total, prev = 0.0, 0.0
    for x in sorted(set(v for v in values if v > 0)):
        W = [v >= x for v in values]
        total += (x - prev) * fn(W)
        prev = x
    return total


def stemmass_closed_forms(probs: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """``(E_{I,R}[max_{e in R} f(e)], 1/2 E_I[f(e_I)])`` via level-set sums."""

    def max_mass(W):
        s, pre = 0.0, 1.0
        for i, p in enumerate(probs):
            if W[i]:
                s += p * pre
                pre *= (1.0 - p) ** 2
            else:
                pre *= 1.0 - p
        return s

    def exit_mass(W):
        s, pre = 0.0, 1.0
        for i, p in enumerate(probs):
            if W[i]:
                s += p * pre
            pre *= 1.0 - p
        return s

    return _level_sums(values, max_mass), 0.5 * _level_sums(values, exit_mass)


def stemmass_brute(probs: Sequence[float], values: Sequence[float]) -> float:
    """Enumerate the stem exit index and the fresh activation of the prefix
    up to and including it; average ``max_{e in R} f(e)``."""
    m = len(probs)
    if m > 16:
        raise PreconditionError("brute-force stem enumeration capped at 16 elements")
    total, stay = 0.0, 1.0
    for I in range(m + 1):
        if I < m:
            w_exit, prefix = stay * probs[I], I + 1
            stay *= 1.0 - probs[I]
        else:
            w_exit, prefix = stay, m
        if w_exit == 0.0:
            continue
        masks, weights = outcome_arrays((1 << prefix) - 1, probs)
        for R, w in zip(masks, weights):
            best = max((values[e] for e in members(int(R))), default=0.0)
            total += w_exit * w * best
    return total


def stemmass_check(probs: Sequence[float], values: Sequence[float], tol: float = 1e-12) -> StemMass:
    if len(probs) != len(values):
        raise PreconditionError("need one value per stem element")
    if any(v < 0 for v in values):
        raise PreconditionError("stem values must be non-negative")
    lhs, rhs = stemmass_closed_forms(probs, values)
    brute = stemmass_brute(probs, values) if len(probs) <= 16 else lhs
    return StemMass(float(lhs), float(rhs), float(brute), bool(lhs >= rhs - tol and abs(lhs - brute) <= tol))


# ------------------------------------------------------------ BFNS

def bfns_check(f: SetFunction, inclusion_probs=None, base=0, distribution=None,
               tol: float = 1e-12) -> Check:
    """``E[h(S)] >= (1 - p) h(∅)`` for ``h(S) = f(S ∪ base)``.

    ``S`` is either independent with ``inclusion_probs`` (per element) or an
    explicit ``distribution`` of ``(subset, probability)`` pairs; ``p`` is
    the largest marginal inclusion probability.
    """
    base = as_mask(base)
    if distribution is None:
        if inclusion_probs is None:
            raise PreconditionError("need inclusion_probs or distribution")
        q = list(inclusion_probs)
        support = sum(1 << e for e, x in enumerate(q) if x > 0)
        masks, weights = outcome_arrays(support, q)
        distribution = list(zip(masks.tolist(), weights.tolist()))
    marg = np.zeros(f.n)
    for S, w in distribution:
        for e in members(as_mask(S)):
            marg[e] += w
    p = float(marg.max()) if f.n else 0.0
    if f(base) < 0:
        raise PreconditionError("BFNS needs a non-negative function")
    lhs = sum(w * f(as_mask(S) | base) for S, w in distribution)
    rhs = (1.0 - p) * f(base)
    return Check(lhs, rhs, lhs >= rhs - tol)


# ------------------------------------------------------------ disjoint copies

def _expect(dist):
    return sum(v * w for v, w in dist)


def disjointify_fact_check(X, Y, Z, tol: float = 1e-12) -> Check:
    """``E[max(X+Y, X+Z)] <= E[max(X+Y, X'+Z)]`` with ``X'`` an independent
    copy of ``X``.  Each argument is a list of ``(value, probability)``."""
    for d in (X, Y, Z):
        if any(v < 0 for v, _ in d):
            raise PreconditionError("the fact is stated for non-negative variables")
    lhs = sum(px * py * pz * max(x + y, x + z)
              for (x, px), (y, py), (z, pz) in itertools.product(X, Y, Z))
    rhs = sum(px * pxx * py * pz * max(x + y, xx + z)
              for (x, px), (xx, pxx), (y, py), (z, pz) in itertools.product(X, X, Y, Z))
    return Check(lhs, rhs, lhs <= rhs + tol)


# ------------------------------------------------------------ concentration

@dataclass
class ConcentrationReport:
    samples: int
    threshold: float
    exceedance: list[float]
    max_deviation: list[float]
    bound: float
    seed: int


def concentration_experiment(inst, tree: Tree, samples: int, seed: int, opt: float | None = None,
                             rel: float = 0.1, block: int = 1000) -> ConcentrationReport:
    """Sample leaves from pi_T and measure, per linear function ``a_i``, how
    often ``|a_i(A_l) - mu_i(P_l)|`` exceeds ``rel * opt``.

    Blocks of ``block`` samples use substreams ``(seed, block index)`` so the
    result does not depend on how blocks are scheduled.
    """
    f = inst.objective
    if not isinstance(f, XosFunction):
        raise PreconditionError("concentration experiment needs an XosFunction")
    g = inst.ground
    if opt is None:
        opt = opt_adaptive(inst)[0]
    thr = rel * opt
    W = f.width
    hits = np.zeros(W)
    worst = np.zeros(W)
    p = np.asarray(g.probs)
    done, b = 0, 0
    while done < samples:
        cnt = min(block, samples - done)
        rng = make_rng(seed, b)
        for _ in range(cnt):
            u, path, active = tree, [], []
            while not is_leaf(u):
                e = u.elt
                path.append(e)
                if rng.random() < p[e]:
                    active.append(e)
                    u = u.yes
                else:
                    u = u.no
            a_act = f.a[:, active].sum(axis=1)
            mu = (f.a[:, path] * p[path]).sum(axis=1)
            dev = np.abs(a_act - mu)
            hits += dev > thr
            np.maximum(worst, dev, out=worst)
        done += cnt
        b += 1
    return ConcentrationReport(samples, thr, (hits / samples).tolist(), worst.tolist(),
                               1.0 / W ** 2, seed)


# ------------------------------------------------------------ gap reports

@dataclass
class GapReport:
    adap_opt: float
    nonadap_opt: float
    natural_nonadaptive: float
    greedy: float | None = None
    xos_alg1: float | None = None
    xos_oracle_calls: int | None = None
    gap_ratio: float | None = None
    natural_ratio: float | None = None
    kind: str = ""
    family: str = ""
    n: int = 0
    digest: str = ""
    seed: int | None = None
    nonadap_plan: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    wall_time: float = 0.0
    version: int = REPORT_VERSION
    tool_version: str = TOOL_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GapReport":
        return cls(**d)

    CSV_FIELDS = ("digest", "family", "n", "kind", "adap_opt", "nonadap_opt", "natural_nonadaptive",
                  "greedy", "xos_alg1", "gap_ratio", "natural_ratio", "seed", "wall_time")

    def csv_row(self) -> dict:
        d = self.to_dict()
        return {k: ("" if d[k] is None else d[k]) for k in self.CSV_FIELDS}


def instance_digest(inst) -> str:
    from .serialize import instance_to_dict
    d = instance_to_dict(inst)
    d.pop("metadata", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _ratio(num, den):
    if den > 0:
        return num / den
    return 1.0 if num <= 0 else math.inf


def gap_report(inst, assert_theorems: bool = False, lam: float | None = None,
               max_states: int | None = None) -> GapReport:
    """Exact adaptive and non-adaptive optima plus the natural strategy of the
    optimal tree, greedy and the XOS algorithm where they apply."""
    t0 = time.perf_counter()
    f, g, c = inst.objective, inst.ground, inst.constraint
    kwargs = {} if max_states is None else {"max_states": max_states}
    adap, tree = opt_adaptive(inst, **kwargs)
    nonadap, plan = opt_nonadaptive(inst)
    natural = alg_value(tree, f, g)
    rep = GapReport(adap, nonadap, natural, kind=f.kind, family=str(inst.metadata.get("family", "")),
                    n=g.n, digest=instance_digest(inst), seed=inst.metadata.get("seed"),
                    nonadap_plan=list(plan.elements))
    if f.kind == MONOTONE_SUBMODULAR and isinstance(c, (CardinalityConstraint, PartitionMatroidConstraint)):
        rep.greedy = greedy_nonadaptive(inst)[0]
    if isinstance(f, XosFunction) and g.n > 0:
        res = xos_algorithm1(inst, lam if lam is not None else default_lambda(f.width, PRACTICAL_LAMBDA_SCALE))
        rep.xos_alg1, rep.xos_oracle_calls = res.value, res.oracle_calls
    rep.gap_ratio = _ratio(adap, nonadap)
    rep.natural_ratio = _ratio(adap, natural)

    tol = 1e-9
    if nonadap > adap + tol:
        rep.violations.append(f"non-adaptive optimum {nonadap} exceeds adaptive optimum {adap}")
    if natural > nonadap + tol:
        rep.violations.append(f"natural strategy {natural} exceeds non-adaptive optimum {nonadap}")
    if f.kind == MONOTONE_SUBMODULAR:
        if nonadap < adap / 3 - tol:
            rep.violations.append(f"gap above 3 on monotone submodular: {adap} vs {nonadap}")
        if natural < adap / 3 - tol:
            rep.violations.append(f"natural strategy below adap/3: {natural} vs {adap}")
    elif f.kind == SUBMODULAR:
        if nonadap < adap / 40 - tol:
            rep.violations.append(f"gap above 40 on submodular: {adap} vs {nonadap}")
    rep.wall_time = time.perf_counter() - t0
    if assert_theorems and rep.violations:
        raise TheoremViolation("; ".join(rep.violations), witness=rep)
    return rep
