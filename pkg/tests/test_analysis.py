import csv
import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from stochprobe.adaptive import chain, opt_adaptive
from stochprobe.analysis import (GapReport, bfns_check, concentration_experiment, disjointify_fact_check,
                                 gap_report, stem_inequality, stem_tightness_ratio, stemmass_check)
from stochprobe.constraints import CardinalityConstraint
from stochprobe.core import GroundSet
from stochprobe.errors import PreconditionError, TheoremViolation
from stochprobe.functions import CutFunction, XosFunction, modular
from stochprobe.instances import Instance, gen_random, gen_xos_tree_lb

probs = st.floats(0, 1)


def test_stem_inequality_examples():
    assert stem_inequality([1.0]) == (1.0, 0.5, True)
    assert stem_inequality([]) == (0.0, 0.0, True)
    assert stem_tightness_ratio(0.01, 1000) == pytest.approx(0.5025, abs=0.001)


@settings(max_examples=300, deadline=None)
@given(st.lists(probs, min_size=1, max_size=50))
def test_stem_inequality_always_holds(a):
    assert stem_inequality(a).holds


def test_stemmass_examples():
    r = stemmass_check([0.5, 0.5], [1, 1])
    assert (r.lhs, r.rhs, r.brute) == pytest.approx((0.625, 0.375, 0.625), abs=1e-12) and r.holds
    r = stemmass_check([0.3], [2.0])
    assert r.lhs == pytest.approx(0.6) and r.rhs == pytest.approx(0.3)
    assert stemmass_check([0.4, 0.7], [0, 0]) == (0, 0, 0, True)
    with pytest.raises(PreconditionError):
        stemmass_check([0.5], [1, 2])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(probs, st.floats(0, 5)), min_size=0, max_size=8))
def test_stemmass_closed_form_matches_enumeration(pairs):
    r = stemmass_check([p for p, _ in pairs], [v for _, v in pairs])
    assert abs(r.lhs - r.brute) <= 1e-12 and r.holds


def test_bfns_examples():
    f = CutFunction(2, [(0, 1, 1.0)])
    r = bfns_check(f, [0.0, 0.5], base=0b01)
    assert r == (0.5, 0.5, True)
    assert bfns_check(f, [0.0, 0.0], base=0b01).holds
    assert bfns_check(f, [1.0, 1.0], base=0b01).rhs == 0
    explicit = bfns_check(f, base=0b01, distribution=[(0, 0.5), (0b10, 0.5)])
    assert explicit == r


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 7), st.data())
def test_bfns_on_random_cuts(seed, n, data):
    f = gen_random("cut", n, seed).objective
    incl = data.draw(st.lists(probs, min_size=n, max_size=n))
    base = data.draw(st.integers(0, (1 << n) - 1))
    assert bfns_check(f, incl, base).holds


def test_fact_examples():
    coin = [(0.0, 0.5), (1.0, 0.5)]
    r = disjointify_fact_check(coin, coin, coin)
    assert r.lhs == pytest.approx(1.25) and r.rhs == pytest.approx(1.375) and r.holds
    const = [(2.0, 1.0)]
    r = disjointify_fact_check(const, coin, [(0.0, 0.25), (3.0, 0.75)])
    assert r.lhs == pytest.approx(r.rhs)


dist = st.lists(st.tuples(st.floats(0, 5), st.floats(0.01, 1)), min_size=1, max_size=3).map(
    lambda d: [(v, w / sum(x for _, x in d)) for v, w in d])


@settings(max_examples=300, deadline=None)
@given(dist, dist, dist)
def test_fact_always_holds(X, Y, Z):
    assert disjointify_fact_check(X, Y, Z).holds


def test_concentration_trivial_cases():
    inst = Instance(GroundSet([1.0, 1.0]), modular([1.0, 2.0]), CardinalityConstraint(2, 2))
    rep = concentration_experiment(inst, chain([0, 1]), 200, seed=0, opt=3.0)
    assert rep.max_deviation == [0.0] and rep.exceedance == [0.0]
    zero = Instance(GroundSet([0.5, 0.5]), XosFunction([[0.0, 0.0]]), CardinalityConstraint(2, 2))
    assert concentration_experiment(zero, chain([0, 1]), 100, seed=0, opt=1.0).max_deviation == [0.0]


def test_concentration_is_block_deterministic():
    inst = gen_xos_tree_lb(2, 2)
    _, t = opt_adaptive(inst)
    a = concentration_experiment(inst, t, 3000, seed=5)
    b = concentration_experiment(inst, t, 3000, seed=5)
    assert a == b and len(a.exceedance) == 4
    assert all(0 <= x <= 1 for x in a.exceedance)


def test_gap_report_examples():
    cov = gen_random("coverage", 7, 3)
    rep = gap_report(cov, assert_theorems=True)
    assert rep.adap_opt >= rep.nonadap_opt >= rep.natural_nonadaptive >= rep.adap_opt / 3 - 1e-9
    assert rep.greedy is not None and rep.violations == []
    cut = gen_random("cut", 6, 3)
    rep = gap_report(cut, assert_theorems=True)
    assert rep.nonadap_opt >= rep.adap_opt / 40
    sure = Instance(GroundSet([1.0] * 4), gen_random("coverage", 4, 1).objective, CardinalityConstraint(4, 2))
    assert gap_report(sure).gap_ratio == pytest.approx(1.0)
    xos = gap_report(gen_random("xos", 6, 2))
    assert xos.xos_alg1 is not None and xos.xos_oracle_calls is not None


def test_gap_report_round_trips():
    rep = gap_report(gen_random("xos", 5, 9))
    back = GapReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert back == rep
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=GapReport.CSV_FIELDS)
    w.writeheader()
    w.writerow(rep.csv_row())
    row = next(csv.DictReader(io.StringIO(buf.getvalue())))
    assert float(row["adap_opt"]) == rep.adap_opt and row["digest"] == rep.digest


def test_theorem_violation_is_fatal_when_asked(monkeypatch):
    import stochprobe.analysis as an
    from stochprobe.nonadaptive import opt_nonadaptive
    monkeypatch.setattr(an, "opt_nonadaptive", lambda i: (0.0, opt_nonadaptive(i)[1]))
    inst = gen_random("coverage", 4, 0)
    assert an.gap_report(inst).violations
    with pytest.raises(TheoremViolation) as exc:
        an.gap_report(inst, assert_theorems=True)
    assert exc.value.witness.violations
