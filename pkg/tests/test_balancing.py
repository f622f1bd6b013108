from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import committees, fig3, instances, toy
from maximin.balancing import balance, is_balanced, maximin_over_subsets
from maximin.flowcore import max_support_flow
from maximin.instance import Solution, complete_graph_k4, gen_cubic_gap, gen_random, instance_from_ballots


def test_single_voter_even_split():
    inst = instance_from_ballots(1, [(2, ["a", "b"])])
    assert balance(inst, (0, 1)).supports == {0: 1, 1: 1}


def test_toy_supports():
    sol = balance(toy(), (0, 1))
    assert sol.supports == {0: 3, 1: 3}
    assert sol.weights == {(0, 0): 3, (0, 1): 1, (1, 1): 2}


def test_fig3_supports():
    assert set(balance(fig3(), (1, 2, 3, 4)).supports.values()) == {1}


def test_member_order_is_kept():
    assert balance(toy(), (1, 0)).committee == (1, 0)


def test_float_mode_matches_exact():
    inst = gen_random(7, 6, 3, 0.5, "integer(1,9)", seed=11)
    exact = balance(inst.to_exact(), (0, 2, 4)).supports
    approx = balance(inst, (0, 2, 4)).supports
    assert all(abs(approx[c] - float(exact[c])) < 1e-9 for c in exact)


def test_bad_committees():
    with pytest.raises(ValueError):
        balance(toy(), ())
    with pytest.raises(ValueError):
        balance(toy(), (0, 0))


def test_is_balanced_detects_edge_above_minimum():
    inst = toy()
    check = is_balanced(inst, Solution((0, 1), {(0, 0): Fraction(4), (1, 1): Fraction(2)}))
    assert not check
    assert check.witness["kind"] == "edge_above_minimum"
    assert (check.witness["voter"], check.witness["candidate"]) == (0, 0)


def test_is_balanced_detects_unspent_stake():
    inst = toy()
    check = is_balanced(inst, Solution((0, 1), {(0, 0): Fraction(3), (1, 1): Fraction(2)}))
    assert not check and check.witness == {"kind": "unspent_stake", "voter": 0,
                                           "spent": 3, "stake": 4}


def test_maximin_over_subsets_disjoint():
    inst = instance_from_ballots(1, [(3, ["a"]), (5, ["b"])])
    assert maximin_over_subsets(inst, (0, 1)) == 3


def test_maximin_over_subsets_k4_pair():
    inst = gen_cubic_gap(complete_graph_k4(), 2)
    assert maximin_over_subsets(inst, (0, 1)) == Fraction(5, 2)


def test_maximin_over_subsets_limit():
    inst = gen_random(5, 22, 1, 0.9, seed=1)
    with pytest.raises(ValueError, match="too large"):
        maximin_over_subsets(inst, tuple(range(21)))


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_balance_properties(data):
    inst = data.draw(instances(max_candidates=7))
    committee = data.draw(committees(inst))
    sol = balance(inst, committee)
    assert is_balanced(inst, sol)
    assert sol.objective == maximin_over_subsets(inst, sol)
    # no feasible vector does better (floor search with r = 1)
    assert not max_support_flow(inst, committee, sol.objective + Fraction(1, 1000))
    # voters without committee neighbours stay idle
    members = set(committee)
    for (n, c) in sol.weights:
        assert c in members


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_supports_shrink_as_committee_grows(data):
    inst = data.draw(instances(max_candidates=7))
    big = data.draw(committees(inst, min_size=2))
    small = big[:data.draw(st.integers(1, len(big) - 1))]
    before, after = balance(inst, small).supports, balance(inst, big).supports
    assert all(before[c] >= after[c] for c in small)
