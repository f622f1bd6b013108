"""Scoring and candidate insertion for the Phragmms heuristic.

For a partial solution (A, w) and threshold t, a voter's slack is the stake
it could redirect to a newcomer without pushing any member it backs below t.
A candidate's pre-score sums the slacks of its approvers; its score is the
largest t with ``prescore(t) >= t``.  ``prescore(t) - t`` is convex,
piecewise linear and strictly decreasing, with breakpoints at member supports,
so scores are computed exactly by solving the right linear piece.
"""
from __future__ import annotations

from dataclasses import dataclass

from .instance import ElectionInstance, Solution
from .numeric import Number


@dataclass(frozen=True)
class ScoreReport:
    candidate: int
    value: Number
    threshold: Number | None = None
    kind: str = "score"  # "prescore", "score" or "linscore"


def _members(solution: Solution) -> set:
    return set(solution.committee)


def unelected(instance: ElectionInstance, solution: Solution, candidates=None) -> list:
    pool = range(instance.candidate_count) if candidates is None else candidates
    members = _members(solution)
    return sorted(c for c in pool if c not in members)


def slack(instance: ElectionInstance, solution: Solution, voter: int, t) -> Number:
    t = instance.num(t)
    members, supports = _members(solution), solution.supports
    value = instance.stakes[voter]
    for c in instance.approvals[voter]:
        if c not in members:
            continue
        w = solution.weights.get((voter, c), 0)
        if not w:
            continue
        value -= w * t / supports[c] if supports[c] > t else w
    return value


def _all_slacks(instance, solution, t) -> list:
    return [slack(instance, solution, n, t) for n in range(instance.n_voters)]


def prescore(instance: ElectionInstance, solution: Solution, candidate: int, t) -> Number:
    return sum((slack(instance, solution, n, t) for n in instance.approvers[candidate]),
               instance.num(0))


def prescores(instance: ElectionInstance, solution: Solution, t, candidates=None) -> dict:
    """Pre-scores of all unelected candidates (optionally restricted to ``candidates``)."""
    slacks = _all_slacks(instance, solution, instance.num(t))
    zero = instance.num(0)
    return {
        c: sum((slacks[n] for n in instance.approvers[c]), zero)
        for c in unelected(instance, solution, candidates)
    }


def _argmax(values: dict):
    best = None
    for c in sorted(values):
        if best is None or values[c] > values[best]:
            best = c
    return best


def max_prescore(instance: ElectionInstance, solution: Solution, t, candidates=None) -> ScoreReport:
    """Unelected candidate with the highest pre-score at ``t`` (lowest id on ties)."""
    t = instance.num(t)
    values = prescores(instance, solution, t, candidates)
    if not values:
        raise ValueError("no unelected candidate")
    best = _argmax(values)
    return ScoreReport(best, values[best], t, "prescore")


def _breakpoints(solution: Solution) -> list:
    return sorted({s for s in solution.supports.values() if s > 0})


def linscore(instance: ElectionInstance, solution: Solution, candidate: int, x) -> Number:
    """Root of the tangent line of ``prescore(candidate, t) - t`` taken at ``t = x``.

    Uses the piece to the right of ``x``: members with support at most ``x``
    contribute their full weight, the others contribute proportionally.
    Never exceeds ``score(candidate)``.
    """
    x = instance.num(x)
    members, supports = _members(solution), solution.supports
    num = instance.num(0)
    den = instance.num(1)
    for n in instance.approvers[candidate]:
        num += instance.stakes[n]
        for c in instance.approvals[n]:
            if c not in members:
                continue
            w = solution.weights.get((n, c), 0)
            if not w:
                continue
            if supports[c] <= x:
                num -= w
            else:
                den += w / supports[c]
    return num / den


def score(instance: ElectionInstance, solution: Solution, candidate: int) -> Number:
    """Largest ``t >= 0`` with ``prescore(candidate, t) >= t``."""
    if candidate in _members(solution):
        raise ValueError(f"candidate {candidate} is already elected")
    anchor = instance.num(0)
    for t in reversed(_breakpoints(solution)):
        if prescore(instance, solution, candidate, t) >= t:
            anchor = t
            break
    return linscore(instance, solution, candidate, anchor)


def find_interval(instance: ElectionInstance, solution: Solution, candidates=None) -> Number:
    """A breakpoint ``t'`` at or below the top score with every pre-score linear above it.

    Binary search over the sorted distinct supports using max pre-score
    queries, ``O(log |A|)`` of them.
    """
    points = [instance.num(0)] + _breakpoints(solution)
    r = len(points) - 1
    if r == 0:
        return points[0]

    def reaches(j):
        return max_prescore(instance, solution, points[j], candidates).value >= points[j]

    if reaches(r):
        return points[r]
    lo, hi = 0, r - 1
    while lo < hi:
        j = (lo + hi + 1) // 2
        if reaches(j):
            lo = j
        else:
            hi = j - 1
    return points[lo]


def max_score(instance: ElectionInstance, solution: Solution, candidates=None) -> ScoreReport:
    """Unelected candidate with the highest score, and that score.

    Linearized scores around ``find_interval``'s point are computed for all
    candidates in one pass; the largest one equals the top score exactly.
    """
    pool = unelected(instance, solution, candidates)
    if not pool:
        raise ValueError("no unelected candidate")
    x = find_interval(instance, solution, pool)
    members, supports = _members(solution), solution.supports
    free, rate = [], []
    for n, approved in enumerate(instance.approvals):
        p, q = instance.stakes[n], instance.num(0)
        for c in approved:
            if c not in members:
                continue
            w = solution.weights.get((n, c), 0)
            if not w:
                continue
            if supports[c] <= x:
                p -= w
            else:
                q += w / supports[c]
        free.append(p)
        rate.append(q)
    values = {}
    for c in pool:
        num = sum((free[n] for n in instance.approvers[c]), instance.num(0))
        den = 1 + sum((rate[n] for n in instance.approvers[c]), instance.num(0))
        values[c] = num / den
    best = _argmax(values)
    return ScoreReport(best, values[best], x, "score")


def insert(instance: ElectionInstance, solution: Solution, candidate: int, t) -> Solution:
    """Add ``candidate`` at threshold ``t``.

    Each approver of the newcomer scales its weight on members supported above
    ``t`` down by ``t / support`` and sends everything it no longer spends to
    the newcomer, whose support becomes ``prescore(candidate, t)``.
    """
    t = instance.num(t)
    members, supports = _members(solution), solution.supports
    if candidate in members:
        raise ValueError(f"candidate {candidate} is already elected")
    if t < 0:
        raise ValueError("threshold must be non-negative")
    weights = dict(solution.weights)
    for n in instance.approvers[candidate]:
        remaining = instance.stakes[n]
        for c in instance.approvals[n]:
            if c not in members:
                continue
            w = weights.get((n, c), 0)
            if w and supports[c] > t:
                w = w * t / supports[c]
                weights[(n, c)] = w
            remaining -= w
        weights[(n, candidate)] = remaining
    weights = {e: w for e, w in weights.items() if w != 0}
    return Solution(solution.committee + (candidate,), weights)


def remove(solution: Solution, member: int) -> Solution:
    """Drop ``member`` and zero all weight on its edges."""
    committee = tuple(c for c in solution.committee if c != member)
    weights = {e: w for e, w in solution.weights.items() if e[1] != member}
    return Solution(committee, weights)
