"""Brute-force ground truth for small instances.

Everything here is exponential and meant for tests and desk experiments.
Optimization oracles run on an exact-rational copy of the instance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .balancing import balance
from .instance import ElectionInstance, Solution

MAX_COMMITTEES = 10**6
MAX_PJR_VOTERS = 16
SUBSET_K_LIMIT = 8


class OracleTooLarge(ValueError):
    pass


def opt_maximin(instance: ElectionInstance) -> tuple:
    """Optimal maximin support and the lexicographically first optimal committee.

    For a fixed committee the balanced least support is the minimum over its
    nonempty sub-committees of ``stake(approvers) / size``, so for small
    ``k`` each committee costs ``2^k`` cached ratio lookups instead of a flow
    computation.  Larger committees are balanced directly.
    """
    count = math.comb(instance.candidate_count, instance.k)
    if count > MAX_COMMITTEES:
        raise OracleTooLarge(f"{count} committees exceed the oracle limit of {MAX_COMMITTEES}")
    exact = instance.to_exact()
    voter_mask = []
    for c in range(exact.candidate_count):
        mask = 0
        for n in exact.approvers[c]:
            mask |= 1 << n
        voter_mask.append(mask)
    stake_cache = {}

    def stake(mask):
        if mask not in stake_cache:
            stake_cache[mask] = sum((exact.stakes[n] for n in range(exact.n_voters) if mask >> n & 1),
                                    Fraction(0))
        return stake_cache[mask]

    ratio_cache = {}

    def ratio(group):
        if group not in ratio_cache:
            union = 0
            for c in group:
                union |= voter_mask[c]
            ratio_cache[group] = stake(union) / len(group)
        return ratio_cache[group]

    best_value, best_committee = None, None
    if exact.k > SUBSET_K_LIMIT:
        for committee in combinations(range(exact.candidate_count), exact.k):
            value = balance(exact, committee).objective
            if best_value is None or value > best_value:
                best_value, best_committee = value, committee
        return best_value, best_committee
    for committee in combinations(range(exact.candidate_count), exact.k):
        value = None
        for size in range(1, len(committee) + 1):
            for group in combinations(committee, size):
                r = ratio(group)
                if value is None or r < value:
                    value = r
            if best_value is not None and value <= best_value:
                break  # cannot beat the incumbent any more
        if best_value is None or value > best_value:
            best_value, best_committee = value, committee
    return best_value, best_committee


@dataclass(frozen=True)
class PJRCheck:
    ok: bool
    voters: tuple = ()
    r: int = 0

    def __bool__(self):
        return self.ok


def check_pjr_exact(instance: ElectionInstance, committee, t) -> PJRCheck:
    """Exact t-PJR test by enumerating all voter groups.

    A group N' violates t-PJR for some ``0 < r <= |A|`` when its stake is at
    least ``r t``, its members share ``r`` approved candidates, and fewer than
    ``r`` committee members are approved by anyone in it.  The witness is the
    group with the largest violated ``r`` (smallest bitmask on ties).
    """
    if instance.n_voters > MAX_PJR_VOTERS:
        raise OracleTooLarge(f"{instance.n_voters} voters exceed the oracle limit of {MAX_PJR_VOTERS}")
    exact = instance.to_exact()
    t = Fraction(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    members = set(committee)
    size = len(members)
    full = (1 << exact.candidate_count) - 1
    approved = []
    for cs in exact.approvals:
        mask = 0
        for c in cs:
            mask |= 1 << c
        approved.append(mask)
    committee_mask = 0
    for c in members:
        committee_mask |= 1 << c

    n = exact.n_voters
    stake = [Fraction(0)] * (1 << n)
    common = [full] * (1 << n)
    union = [0] * (1 << n)
    witness, witness_r = 0, 0
    for group in range(1, 1 << n):
        low = group & -group
        v = low.bit_length() - 1
        rest = group ^ low
        stake[group] = stake[rest] + exact.stakes[v]
        common[group] = common[rest] & approved[v]
        union[group] = union[rest] | approved[v]
        r = min(size, bin(common[group]).count("1"))
        if t > 0:
            r = min(r, math.floor(stake[group] / t))
        if r > bin(union[group] & committee_mask).count("1") and r > witness_r:
            witness, witness_r = group, r
    if witness_r == 0:
        return PJRCheck(True)
    voters = tuple(v for v in range(n) if witness >> v & 1)
    return PJRCheck(False, voters, witness_r)


def score_by_rootfind(instance: ElectionInstance, solution: Solution, candidate: int,
                      tol: float = 1e-12) -> float:
    """Score of an unelected candidate by bisection on ``prescore(t) - t``.

    Independent of the piecewise-linear machinery; floats throughout.
    """
    members = set(solution.committee)
    if candidate in members:
        raise ValueError(f"candidate {candidate} is already elected")
    supports = {c: 0.0 for c in members}
    for (n, c), w in solution.weights.items():
        if c in members:
            supports[c] += float(w)
    edges = {}
    for (n, c), w in solution.weights.items():
        if c in members and w > 0:
            edges.setdefault(n, []).append((float(w), supports[c]))
    voters = instance.approvers[candidate]

    def excess(t):
        total = 0.0
        for n in voters:
            s = float(instance.stakes[n])
            for w, supp in edges.get(n, ()):
                s -= w * min(1.0, t / supp)
            total += s
        return total - t

    lo, hi = 0.0, sum(float(instance.stakes[n]) for n in voters)
    if excess(hi) >= 0:
        return hi
    for _ in range(400):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = (lo + hi) / 2
        if excess(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
