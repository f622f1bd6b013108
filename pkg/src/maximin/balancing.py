"""Balanced weight vectors for a fixed committee.

A balanced vector maximizes the total member support and, among those,
minimizes the sum of squared supports.  Its support levels are found by
repeatedly peeling off the sub-committee with the smallest ratio
``stake(approvers) / size`` and recursing on what is left.
"""
from __future__ import annotations

from dataclasses import dataclass

from .flowcore import committee_flow
from .instance import ElectionInstance, Solution
from .numeric import Number, approx_eq, approx_ge


def _stake_of(instance, voters):
    return sum((instance.stakes[n] for n in voters), instance.num(0))


def _lowest_level(instance: ElectionInstance, members: list, voters: set):
    """Smallest level ``lam`` that every member can reach, and the members stuck at it.

    Dinkelbach iteration on the ratio: test ``lam`` with a max flow; if some
    member falls short, the sink side of the min cut has a strictly smaller
    ratio and becomes the next guess.  Terminates after finitely many cuts,
    exactly in rational mode.
    """
    lam = _stake_of(instance, voters) / len(members)
    for _ in range(4 * len(members) + 64):
        weights, value, stuck = committee_flow(instance, members, sorted(voters),
                                               {c: lam for c in members})
        if approx_ge(value, lam * len(members)):
            return lam, weights, stuck
        if not stuck:
            return lam, weights, stuck
        approvers = {n for c in stuck for n in instance.approvers[c]} & voters
        new_lam = _stake_of(instance, approvers) / len(stuck)
        if not new_lam < lam:
            # float rounding only: accept the current level
            return lam, weights, stuck
        lam = new_lam
    return lam, weights, stuck


def balance(instance: ElectionInstance, committee) -> Solution:
    """Balanced solution for ``committee`` (member order is preserved).

    Voters with no committee neighbour keep zero weight everywhere.
    """
    committee = tuple(committee)
    if not committee:
        raise ValueError("committee must be nonempty")
    if len(set(committee)) != len(committee):
        raise ValueError("committee has repeated members")
    remaining = set(committee)
    free_voters = {n for c in committee for n in instance.approvers[c]}
    weights = {}
    while remaining:
        members = sorted(remaining)
        lam, flow, stuck = _lowest_level(instance, members, free_voters)
        if not stuck:
            # every member sits at the same level
            stuck = set(members)
        for (n, c), x in flow.items():
            if c in stuck:
                weights[(n, c)] = x
        used = {n for c in stuck for n in instance.approvers[c]}
        free_voters -= used
        remaining -= stuck
    return Solution(committee, weights)


@dataclass
class BalanceCheck:
    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def is_balanced(instance: ElectionInstance, solution: Solution) -> BalanceCheck:
    """Test the two local conditions that characterize balanced vectors.

    Every voter with a committee neighbour spends all its stake on the
    committee, and positive weight only goes to that voter's least-supported
    committee neighbours.
    """
    members = set(solution.committee)
    supports = solution.supports
    for n, approved in enumerate(instance.approvals):
        neighbours = [c for c in approved if c in members]
        if not neighbours:
            continue
        spent = sum((solution.weights.get((n, c), 0) for c in neighbours), instance.num(0))
        if not approx_eq(spent, instance.stakes[n]):
            return BalanceCheck(False, {"kind": "unspent_stake", "voter": n,
                                        "spent": spent, "stake": instance.stakes[n]})
        lowest = min(supports[c] for c in neighbours)
        for c in neighbours:
            if solution.weights.get((n, c), 0) > 0 and not approx_eq(supports[c], lowest):
                return BalanceCheck(False, {"kind": "edge_above_minimum", "voter": n,
                                            "candidate": c, "support": supports[c],
                                            "minimum": lowest})
    return BalanceCheck(True)


def maximin_over_subsets(instance: ElectionInstance, committee) -> Number:
    """Minimum over nonempty sub-committees of approver stake divided by size.

    Accepts a committee or a ``Solution``.  Exponential; limited to 20 members.
    """
    if isinstance(committee, Solution):
        committee = committee.committee
    committee = sorted(set(committee))
    if not committee:
        raise ValueError("committee must be nonempty")
    if len(committee) > 20:
        raise ValueError(f"committee too large for enumeration ({len(committee)} > 20)")
    masks = []
    for c in committee:
        mask = 0
        for n in instance.approvers[c]:
            mask |= 1 << n
        masks.append(mask)
    stakes = instance.stakes
    best = None
    size = len(committee)
    union = [0] * (1 << size)
    for subset in range(1, 1 << size):
        low = subset & -subset
        union[subset] = union[subset ^ low] | masks[low.bit_length() - 1]
        mask = union[subset]
        total = instance.num(0)
        while mask:
            bit = mask & -mask
            total += stakes[bit.bit_length() - 1]
            mask ^= bit
        ratio = total / bin(subset).count("1")
        if best is None or ratio < best:
            best = ratio
    return best

