import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochprobe.errors import PreconditionError
from stochprobe.functions import (AllTypesFunction, CoverageFunction, CutFunction, PartitionRankFunction,
                                  TableFunction, XosFunction, audit, contract, fmax, fmax_half_estimate,
                                  fmax_witness, modular, unit_demand, verify_monotone, verify_nonnegative,
                                  verify_submodular, xos_of_fmax)
from stochprobe.instances import gen_random


def brute_fmax(f, S):
    elems = [e for e in range(f.n) if S >> e & 1]
    return max(f(sum(1 << e for e in T)) for r in range(len(elems) + 1)
               for T in itertools.combinations(elems, r))


def test_table_function_requires_zero_at_empty():
    with pytest.raises(PreconditionError):
        TableFunction([1.0, 2.0])


def test_fmax_examples():
    f = TableFunction.from_dict_values(2, {(0,): 2, (1,): 1, (0, 1): 0})
    assert fmax(f, 0b11) == 2
    cut = CutFunction(2, [(0, 1, 1.0)])
    assert fmax(cut, 0b11) == 1
    assert fmax_witness(cut, 0b11) == (1.0, 0b01)
    cov = CoverageFunction([[0, 1], [1, 2]], [1, 2, 3])
    assert all(fmax(cov, S) == cov(S) for S in range(4))


def test_fmax_table_matches_brute_force():
    inst = gen_random("cut", 7, 3)
    f = inst.objective
    table = f.fmax_table()
    for S in range(1 << 7):
        assert table[S] == pytest.approx(brute_fmax(f, S), abs=1e-12)


def test_half_estimate_examples():
    lin = modular([1.0] * 4)
    assert fmax_half_estimate(lin, 0b1111) == pytest.approx(2.0)
    assert fmax_half_estimate(lin, 0) == 0
    assert fmax_half_estimate(CutFunction(2, [(0, 1, 1.0)]), 0b11) == pytest.approx(0.5)


def test_half_estimate_sampled_is_close():
    f = gen_random("cut", 8, 4).objective
    exact = fmax_half_estimate(f, 255)
    approx = fmax_half_estimate(f, 255, exact=False, samples=40_000, seed=1)
    assert approx == pytest.approx(exact, abs=0.05 * max(exact, 1))


def test_contract_examples():
    lin = modular([1.0, 1.0, 1.0])
    assert contract(lin, 0) is lin
    g = contract(lin, 0b001)
    assert [g(T) for T in (0b000, 0b001, 0b110, 0b111)] == [0, 0, 2, 2]
    assert contract(CutFunction(2, [(0, 1, 1.0)]), 0b01)(0b10) == -1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 63), st.integers(0, 63))
def test_contraction_composes(seed, A, B):
    B &= ~A
    f = gen_random("cut", 6, seed).objective
    two = contract(contract(f, A), B)
    one = contract(f, A | B)
    for T in range(64):
        assert two(T) == pytest.approx(one(T), abs=1e-12)


def test_verifier_examples():
    assert verify_submodular(CoverageFunction([[0], [0, 1]], [1, 1])).ok
    bad = TableFunction.from_dict_values(2, {(0,): 1, (1,): 1, (0, 1): 3})
    v = verify_submodular(bad)
    assert not v.ok and v.witness == (0b01, 0b10)
    assert verify_submodular(CutFunction(3, [(0, 1, 1.0), (1, 2, 2.0)])).ok
    assert verify_monotone(AllTypesFunction([0, 0, 1])).ok
    m = verify_monotone(CutFunction(2, [(0, 1, 1.0)]))
    assert not m.ok and m.witness == (0b01, 0b11)
    assert verify_monotone(XosFunction([[1, 0, 2], [0, 3, 0]])).ok
    assert verify_nonnegative(CutFunction(2, [(0, 1, 1.0)])).ok
    assert not verify_nonnegative(contract(CutFunction(2, [(0, 1, 1.0)]), 0b01)).ok


def test_xos_fmax_identity():
    assert xos_of_fmax(modular([1, 2, 3])).ok
    rng = np.random.default_rng(0)
    f = XosFunction(rng.random((3, 6)))
    assert xos_of_fmax(f).ok
    assert fmax(f, 0) == f(0) == 0


def test_xos_rejects_negative_coefficients():
    with pytest.raises(PreconditionError):
        XosFunction([[1.0, -0.5]])


def test_unit_demand_and_partition_rank():
    u = unit_demand([3, 2])
    assert [u(S) for S in range(4)] == [0, 3, 2, 3]
    r = PartitionRankFunction([0, 0, 1], [1, 1])
    assert [r(S) for S in (0b011, 0b101, 0b111)] == [1, 2, 2]


def test_alltypes_values():
    f = AllTypesFunction([0, 0, 1, 1])
    assert f(0b0101) == 1 and f(0b0011) == 0
    assert f.monotone and not verify_submodular(f).ok


@pytest.mark.parametrize("family", ["coverage", "xos"])
def test_monotone_families_pass_audit(family):
    for seed in range(10):
        f = gen_random(family, 8, seed).objective
        assert audit(f) == []
        for S in range(1 << 8):
            assert fmax(f, S) == pytest.approx(f(S), abs=1e-9)


def test_audit_catches_mislabel():
    mislabeled = TableFunction([0, 1, 1, 3], kind="monotone-submodular")
    assert audit(mislabeled)
