import pytest
from hypothesis import given, settings, strategies as st

from stochprobe.adaptive import (LEAF, adap_online_value, adap_value, alg_value, chain, deepness, depth, leaves,
                                 opt_adaptive, probe, random_tree, size, stem, subtrees, tree_equal,
                                 tree_from_json, tree_to_json, validate_tree)
from stochprobe.constraints import CardinalityConstraint, PrefixDagConstraint
from stochprobe.core import GroundSet, make_rng
from stochprobe.errors import LimitError, StateBudgetError, StructuralError
from stochprobe.functions import PartitionRankFunction, TableFunction, modular, unit_demand
from stochprobe.instances import Instance, gen_random

HALF = GroundSet([0.5, 0.5])


def all_trees(c, state, probed):
    yield LEAF
    for e in c.feasible_next(state, probed):
        nxt = c.transition(state, e)
        subs = list(all_trees(c, nxt, probed | 1 << e))
        for y in subs:
            for n in subs:
                yield probe(e, y, n)


def test_adap_value_examples():
    f = modular([1.0])
    assert adap_value(LEAF, f, GroundSet([0.5])) == 0
    assert adap_value(probe(0), f, GroundSet([0.5])) == 0.5
    cap = PartitionRankFunction([0, 0])
    assert adap_value(chain([0, 1]), cap, HALF) == pytest.approx(0.75)


def test_online_value_examples():
    f = modular([1.0, 2.0])
    t = probe(0, probe(1), probe(1))
    assert adap_online_value(t, f, HALF, keep_prob=1.0) == pytest.approx(adap_value(t, f, HALF))
    assert adap_online_value(t, f, HALF, keep_prob=0.0) == 0
    assert adap_online_value(probe(0), modular([1.0]), GroundSet([1.0])) == pytest.approx(0.5)


def test_alg_value_examples():
    cap = PartitionRankFunction([0, 0])
    assert alg_value(LEAF, cap, HALF) == 0
    assert alg_value(chain([0, 1]), cap, HALF) == pytest.approx(0.625)
    t = probe(0, probe(1), probe(1))
    ones = GroundSet([1.0, 1.0])
    assert alg_value(t, modular([1, 2]), ones) == adap_value(t, modular([1, 2]), ones)


def test_opt_adaptive_examples():
    assert opt_adaptive(Instance(GroundSet([0.5]), modular([1.0]), CardinalityConstraint(1, 1)))[0] == 0.5
    u = unit_demand([3, 2])
    v1, t1 = opt_adaptive(Instance(HALF, u, CardinalityConstraint(2, 1)))
    assert v1 == 1.5 and t1.elt == 0
    assert opt_adaptive(Instance(HALF, u, CardinalityConstraint(2, 2)))[0] == 2.0


def test_stem_and_deepness():
    assert stem(LEAF).elements == () and deepness(LEAF) == 0
    t = chain([0, 1, 2])
    assert stem(t).elements == (0, 1, 2) and deepness(t) == 1
    full = probe(0, probe(1, probe(2), probe(2)), probe(1, probe(2), probe(2)))
    assert deepness(full) == 3
    exits = stem(t).exit_probabilities(GroundSet([0.5, 0.5, 0.5]))
    assert exits == pytest.approx([0.5, 0.25, 0.125, 0.125])


def test_validate_tree_rejects_bad_trees():
    with pytest.raises(StructuralError):
        validate_tree(probe(0, probe(0)), 2)
    with pytest.raises(StructuralError):
        validate_tree(probe(5), 2)
    with pytest.raises(StructuralError):
        adap_value(chain([0, 1]), modular([1, 1]), HALF, CardinalityConstraint(2, 1))


def test_leaf_distribution_sums_to_one():
    inst = gen_random("coverage", 6, 1)
    t = random_tree(inst, 4, 20)
    assert sum(p for p, _, _ in leaves(t, inst.ground)) == pytest.approx(1.0, abs=1e-12)


def test_random_tree_contract():
    inst = gen_random("coverage", 5, 2, {"k": 1})
    assert random_tree(inst, 1, 0) is LEAF
    for s in range(20):
        t = random_tree(inst, s, 10)
        assert depth(t) <= 1
        validate_tree(t, inst.n, inst.constraint)
    assert tree_equal(random_tree(inst, 9, 10), random_tree(inst, 9, 10))


@pytest.mark.parametrize("seed", range(12))
def test_dp_matches_brute_force_over_all_trees(seed):
    rng = make_rng(seed)
    n = int(rng.integers(1, 4))
    family = ["coverage", "cut", "xos"][seed % 3]
    params = {"constraint": "cardinality"} if seed % 2 else {"constraint": "partition_matroid"}
    inst = gen_random(family, n, seed, params)
    c = inst.constraint
    best = max(adap_value(t, inst.objective, inst.ground) for t in all_trees(c, c.initial, 0))
    assert opt_adaptive(inst)[0] == pytest.approx(best, abs=1e-12)


def test_dp_with_order_dependent_constraint():
    f = modular([1.0, 1.0, 1.0])
    c = PrefixDagConstraint(3, [[0, 1], [2]])
    inst = Instance(GroundSet([0.5, 0.5, 0.9]), f, c)
    best = max(adap_value(t, f, inst.ground) for t in all_trees(c, c.initial, 0))
    assert opt_adaptive(inst)[0] == pytest.approx(best)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["coverage", "cut", "xos"]))
def test_dp_tree_reevaluates_and_has_subtree_property(seed, family):
    inst = gen_random(family, 6, seed)
    v, t = opt_adaptive(inst)
    f, g = inst.objective, inst.ground
    assert adap_value(t, f, g, inst.constraint) == pytest.approx(v, abs=1e-12)
    for u in subtrees(t):
        assert adap_value(u, f, g) <= v + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_factor_three_on_random_trees(seed, n):
    inst = gen_random("coverage", n, seed)
    t = random_tree(inst, seed, 15)
    f, g = inst.objective, inst.ground
    assert alg_value(t, f, g) >= adap_value(t, f, g) / 3 - 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 7))
def test_online_keeps_a_quarter(seed, n):
    inst = gen_random("cut", n, seed)
    t = random_tree(inst, seed, 12)
    f, g = inst.objective, inst.ground
    assert adap_online_value(t, f, g) >= adap_value(t, f, g) / 4 - 1e-9


def test_more_probability_never_hurts_monotone():
    inst = gen_random("coverage", 5, 11)
    base = opt_adaptive(inst)[0]
    for e in range(5):
        probs = list(inst.ground.probs)
        probs[e] = min(1.0, probs[e] + 0.2)
        bumped = Instance(GroundSet(probs), inst.objective, inst.constraint)
        assert opt_adaptive(bumped)[0] >= base - 1e-12


def test_dp_limits():
    big = Instance(GroundSet([0.5] * 15), modular([1.0] * 15), CardinalityConstraint(15, 2))
    with pytest.raises(LimitError):
        opt_adaptive(big)
    with pytest.raises(StateBudgetError):
        opt_adaptive(gen_random("coverage", 8, 0), max_states=10)


def test_dp_is_deterministic_and_shares_subtrees():
    inst = gen_random("xos", 7, 5)
    v1, t1 = opt_adaptive(inst)
    v2, t2 = opt_adaptive(inst)
    assert v1 == v2 and tree_equal(t1, t2)
    assert size(t1) >= 1


def test_tree_json_round_trip():
    t = probe(2, chain([0, 1]), probe(1))
    assert tree_equal(tree_from_json(tree_to_json(t)), t)
    with pytest.raises(StructuralError):
        tree_from_json({"elt": 1})


def test_table_objective_in_dp():
    f = TableFunction.from_dict_values(2, {(0,): 1, (1,): 1, (0, 1): 3}, kind="arbitrary")
    v, _ = opt_adaptive(Instance(GroundSet([1.0, 1.0]), f, CardinalityConstraint(2, 2)))
    assert v == 3
