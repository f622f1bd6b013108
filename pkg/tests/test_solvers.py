import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from helpers import fig3, instances
from maximin.balancing import balance, is_balanced
from maximin.instance import gen_random, instance_from_ballots
from maximin.oracle import opt_maximin
from maximin.solvers import (
    APPROX_315,
    ls_pjr,
    solve_balanced_phragmms,
    solve_lazy_mms,
    solve_lazy_mms_search,
    solve_mms,
    solve_seq_phragmen,
)
from maximin.verify import pjr_condition, verify_full


def test_balanced_phragmms_fig3():
    sol = solve_balanced_phragmms(fig3())
    assert sol.committee[0] == 1
    assert set(sol.committee) == {1, 2, 3, 4} and sol.objective == 1


def test_balanced_phragmms_single_voter():
    # c only exists to make k = 2 legal
    inst = instance_from_ballots(2, [(2, ["a", "b"]), (Fraction(1, 10), ["c"])])
    assert solve_balanced_phragmms(inst).supports == {0: 1, 1: 1}


def test_seq_phragmen_fig3():
    inst = fig3()
    sol = solve_seq_phragmen(inst)
    assert sol.committee == (1, 2, 3, 0)
    assert sol.objective == inst.stakes[0] == Fraction(60, 119)
    assert sol.supports == {1: Fraction(172, 91), 2: Fraction(108, 91), 3: Fraction(12, 13), 0: Fraction(60, 119)}


def test_seq_phragmen_disjoint_voters_pick_largest():
    inst = instance_from_ballots(2, [(5, ["a"]), (2, ["b"]), (7, ["c"])])
    assert set(solve_seq_phragmen(inst).committee) == {0, 2}


def test_mms_fig3_and_k1():
    assert set(solve_mms(fig3()).committee) == {1, 2, 3, 4}
    inst = instance_from_ballots(1, [(2, ["a"]), (1, ["b"]), (2, ["b"])])
    assert solve_mms(inst).committee == (1,)


def test_lazy_mms_examples():
    inst = fig3()
    assert set(solve_lazy_mms(inst, Fraction(9, 10)).committee) == {1, 2, 3, 4}
    assert solve_lazy_mms(inst, inst.t_hat + 1) is None
    with pytest.raises(ValueError):
        solve_lazy_mms(inst, -1)


@given(instances())
@settings(max_examples=40, deadline=None)
def test_lazy_mms_at_zero_is_balanced_phragmms(inst):
    lazy = solve_lazy_mms(inst, 0)
    greedy = solve_balanced_phragmms(inst)
    assert lazy.committee == greedy.committee and lazy.weights == greedy.weights


def test_lazy_search_trace_and_trial_budget():
    inst = gen_random(8, 7, 3, 0.4, "integer(1,9)", seed=4, exact=True)
    trace = []
    best = solve_lazy_mms_search(inst, Fraction(1, 100), trace)
    assert len(trace) <= 25
    assert trace[0][1]  # t/2 always succeeds
    first = solve_lazy_mms(inst, trace[0][0])
    assert best.objective >= first.objective
    assert all(best.objective >= t for t, ok in trace if ok)


def test_lazy_search_rejects_bad_eps():
    with pytest.raises(ValueError):
        solve_lazy_mms_search(fig3(), 0)


@given(instances())
@settings(max_examples=40, deadline=None)
def test_solver_guarantees(inst):
    opt, _ = opt_maximin(inst)
    mms, bal = solve_mms(inst), solve_balanced_phragmms(inst)
    lazy = solve_lazy_mms_search(inst, Fraction(1, 10))
    seq = solve_seq_phragmen(inst)
    for sol in (mms, bal, lazy, seq):
        assert len(sol.committee) == inst.k and verify_full(inst, sol).feasible
    assert 2 * mms.objective >= opt
    assert APPROX_315 * bal.objective >= opt
    assert (2 + Fraction(1, 10)) * lazy.objective >= opt
    assert is_balanced(inst, bal) and verify_full(inst, bal).passed


@given(instances())
@settings(max_examples=40, deadline=None)
def test_balanced_phragmms_least_support_never_increases(inst):
    trace = []
    solve_balanced_phragmms(inst, trace)
    objectives = [obj for _, _, obj in trace]
    assert all(a >= b for a, b in zip(objectives, objectives[1:]))


def test_ls_pjr_leaves_locally_optimal_input_alone():
    inst = fig3()
    sol = solve_balanced_phragmms(inst)
    trace = []
    out = ls_pjr(inst, sol, Fraction(1, 10), trace)
    assert len(trace) == 1 and out.committee == sol.committee and out.weights == sol.weights


def test_ls_pjr_swaps_c0_out_of_fig3():
    inst = fig3()
    seq = solve_seq_phragmen(inst)
    trace = []
    out = ls_pjr(inst, seq, Fraction(1, 100), trace)
    assert 0 not in out.committee
    assert out.objective == Fraction(4644, 8737) > seq.objective
    assert trace[0]["removed"] == 0 and len(trace) == 2


def test_ls_pjr_stops_immediately_at_eps_tenth():
    # the top score (about 0.53) is below 1.1 times the least support (about 0.55)
    inst = fig3()
    seq = solve_seq_phragmen(inst)
    trace = []
    assert ls_pjr(inst, seq, Fraction(1, 10), trace).committee == seq.committee
    assert len(trace) == 1


@given(instances())
@settings(max_examples=40, deadline=None)
def test_ls_pjr_infinite_eps(inst):
    seq = solve_seq_phragmen(inst)
    trace = []
    out = ls_pjr(inst, seq, math.inf, trace)
    assert len(trace) <= inst.k + 1
    assert out.objective >= seq.objective
    assert pjr_condition(inst, out, inst.t_hat)


def test_ls_pjr_preconditions():
    inst = fig3()
    partial = balance(inst, (1, 2))
    with pytest.raises(ValueError):
        ls_pjr(inst, partial, 1)
    with pytest.raises(ValueError):
        ls_pjr(inst, solve_seq_phragmen(inst), 0)
