"""Seeded property suites run by ``stochprobe verify``."""
from __future__ import annotations

from typing import Callable, NamedTuple

from .adaptive import adap_value, alg_value, opt_adaptive, random_tree
from .analysis import bfns_check, disjointify_fact_check, stem_inequality, stemmass_check
from .core import make_rng
from .functions import fmax, fmax_half_estimate
from .instances import gen_random
from .nonadaptive import opt_nonadaptive

TOL = 1e-9


class SuiteResult(NamedTuple):
    name: str
    checked: int
    ok: bool
    witness: object = None


def _stem(seed, count):
    rng = make_rng(seed, 1)
    for i in range(count):
        a = rng.random(int(rng.integers(1, 51))).tolist()
        r = stem_inequality(a)
        if not r.holds:
            return i + 1, {"a": a, "lhs": r.lhs, "rhs": r.rhs}
    return count, None


def _stemmass(seed, count):
    rng = make_rng(seed, 2)
    for i in range(count):
        m = int(rng.integers(0, 9))
        p = rng.random(m).tolist()
        v = rng.integers(0, 4, size=m).astype(float).tolist()
        r = stemmass_check(p, v)
        if not r.holds:
            return i + 1, {"probs": p, "values": v, **r._asdict()}
    return count, None


def _feige(seed, count):
    rng = make_rng(seed, 3)
    for i in range(count):
        inst = gen_random("cut", int(rng.integers(2, 9)), int(rng.integers(2**31)))
        f = inst.objective
        for S in range(1 << f.n):
            hi, mid = fmax(f, S), fmax_half_estimate(f, S)
            if not hi / 4 - TOL <= mid <= hi + TOL:
                return i + 1, {"instance": inst.metadata, "S": S, "fmax": hi, "half": mid}
    return count, None


def _bfns(seed, count):
    rng = make_rng(seed, 4)
    for i in range(count):
        inst = gen_random("cut", int(rng.integers(1, 8)), int(rng.integers(2**31)))
        f = inst.objective
        base = int(rng.integers(1 << f.n))
        incl = [0.0 if base >> e & 1 else float(x) for e, x in enumerate(rng.random(f.n))]
        r = bfns_check(f, incl, base)
        if not r.holds:
            return i + 1, {"instance": inst.metadata, "base": base, "probs": incl, **r._asdict()}
    return count, None


def _factor3(seed, count):
    rng = make_rng(seed, 5)
    for i in range(count):
        inst = gen_random("coverage", int(rng.integers(1, 9)), int(rng.integers(2**31)))
        t = random_tree(inst, int(rng.integers(2**31)), max_nodes=12)
        adap, alg = adap_value(t, inst.objective, inst.ground), alg_value(t, inst.objective, inst.ground)
        if alg < adap / 3 - TOL:
            return i + 1, {"instance": inst.metadata, "adap": adap, "alg": alg}
    return count, None


def _factor40(seed, count):
    rng = make_rng(seed, 6)
    for i in range(count):
        n = int(rng.integers(1, 8))
        inst = gen_random("cut", n, int(rng.integers(2**31)), {"k": int(rng.integers(1, n + 1))})
        adap, nonadap = opt_adaptive(inst)[0], opt_nonadaptive(inst)[0]
        if nonadap < adap / 40 - TOL:
            return i + 1, {"instance": inst.metadata, "adap": adap, "nonadap": nonadap}
    return count, None


def _fact(seed, count):
    rng = make_rng(seed, 7)

    def dist():
        k = int(rng.integers(1, 4))
        w = rng.random(k) + 1e-3
        return list(zip(rng.integers(0, 5, size=k).astype(float).tolist(), (w / w.sum()).tolist()))

    for i in range(count):
        X, Y, Z = dist(), dist(), dist()
        r = disjointify_fact_check(X, Y, Z)
        if not r.holds:
            return i + 1, {"X": X, "Y": Y, "Z": Z, **r._asdict()}
    return count, None


SUITES: dict[str, Callable[[int, int], tuple[int, object]]] = {
    "stem": _stem,
    "stemmass": _stemmass,
    "feige": _feige,
    "bfns": _bfns,
    "factor3": _factor3,
    "factor40": _factor40,
    "fact": _fact,
}

DEFAULT_COUNTS = {"stem": 10000, "stemmass": 1000, "feige": 50, "bfns": 200,
                  "factor3": 200, "factor40": 50, "fact": 1000}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> list[SuiteResult]:
    """Run one suite (or ``all``); stops each suite at its first witness."""
    names = list(SUITES) if name == "all" else [name]
    out = []
    for nm in names:
        if nm not in SUITES:
            raise KeyError(nm)
        checked, witness = SUITES[nm](seed, DEFAULT_COUNTS[nm] if count is None else count)
        out.append(SuiteResult(nm, checked, witness is None, witness))
    return out
