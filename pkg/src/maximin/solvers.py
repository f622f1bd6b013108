"""Committee election rules and the PJR-enforcing local search.

All argmax/argmin ties go to the lowest candidate id.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction

from .balancing import balance
from .instance import ElectionInstance, Solution, empty_solution
from .numeric import approx_ge
from .phragmms import insert, max_score, remove

log = logging.getLogger(__name__)

APPROX_315 = Fraction(315, 100)


def solve_balanced_phragmms(instance: ElectionInstance, trace: list | None = None) -> Solution:
    """Greedy: insert the top-score candidate, then rebalance, ``k`` times."""
    solution = empty_solution()
    for _ in range(instance.k):
        best = max_score(instance, solution)
        solution = insert(instance, solution, best.candidate, best.value)
        solution = balance(instance, solution.committee)
        if trace is not None:
            trace.append((best.candidate, best.value, solution.objective))
    return solution


def solve_seq_phragmen(instance: ElectionInstance) -> Solution:
    """Sequential Phragmén with stake-weighted loads.

    The loads are turned into a feasible weight vector at the end by scaling
    each voter's edge weights by ``stake / load``.
    """
    zero = instance.num(0)
    voter_load = [zero] * instance.n_voters
    weights = {}
    committee = []
    for _ in range(instance.k):
        best, best_load = None, None
        for c in range(instance.candidate_count):
            if c in committee:
                continue
            backing = instance.approval_stake(c)
            load = (1 + sum((instance.stakes[n] * voter_load[n] for n in instance.approvers[c]),
                            zero)) / backing
            if best is None or load < best_load:
                best, best_load = c, load
        committee.append(best)
        for n in instance.approvers[best]:
            weights[(n, best)] = best_load - voter_load[n]
            voter_load[n] = best_load
    scaled = {}
    for (n, c), w in weights.items():
        if w > 0:
            scaled[(n, c)] = w * instance.stakes[n] / voter_load[n]
    return Solution(tuple(committee), scaled)


def solve_mms(instance: ElectionInstance) -> Solution:
    """Balance ``A + c`` for every unelected ``c`` and keep the best, ``k`` times."""
    solution = empty_solution()
    for _ in range(instance.k):
        best = None
        for c in range(instance.candidate_count):
            if c in solution.committee:
                continue
            trial = balance(instance, solution.committee + (c,))
            if best is None or trial.objective > best.objective:
                best = trial
        solution = best
    return solution


def solve_lazy_mms(instance: ElectionInstance, threshold) -> Solution | None:
    """Inspect candidates by current top score; keep one iff the rebalanced
    committee still has least support at least ``threshold``.

    Returns ``None`` when the candidates run out before ``k`` are kept.
    """
    t = instance.num(threshold)
    if t < 0:
        raise ValueError("threshold must be non-negative")
    solution = empty_solution()
    uninspected = set(range(instance.candidate_count))
    while uninspected:
        pick = max_score(instance, solution, uninspected).candidate
        uninspected.discard(pick)
        trial = balance(instance, solution.committee + (pick,))
        if approx_ge(trial.objective, t):
            solution = trial
            if len(solution.committee) == instance.k:
                return solution
    return None


def solve_lazy_mms_search(instance: ElectionInstance, eps, trace: list | None = None) -> Solution:
    """Geometric search for the largest threshold at which lazy MMS succeeds.

    Seeded with the Balanced-Phragmms objective ``t``: the search starts from
    ``[t/2, 3.15 t]`` and stops once the bracket ratio is at most ``1 + eps/2``.
    Returns the successful trial with the highest objective.
    """
    eps = instance.num(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    seed = solve_balanced_phragmms(instance).objective
    lo, hi = seed / 2, seed * instance.num(APPROX_315)
    best = solve_lazy_mms(instance, lo)
    if trace is not None:
        trace.append((lo, best is not None))
    if best is None:
        # cannot happen when the seed is a genuine approximation; keep the seed
        log.warning("lazy MMS failed at half the seed objective")
        return solve_balanced_phragmms(instance)
    while hi / lo > 1 + eps / 2:
        mid = instance.num(math.sqrt(float(lo) * float(hi)))
        if not lo < mid < hi:
            break
        trial = solve_lazy_mms(instance, mid)
        if trace is not None:
            trace.append((mid, trial is not None))
        if trial is None:
            hi = mid
        else:
            lo = mid
            if trial.objective >= best.objective:
                best = trial
    return best


def ls_pjr(instance: ElectionInstance, solution: Solution, eps, trace: list | None = None) -> Solution:
    """Local search that swaps the least-supported member for the top scorer.

    Stops once the top score drops below ``min((1 + eps) * least support, t_hat)``;
    ``eps = math.inf`` leaves only ``t_hat``.  The least support never
    decreases, and the output satisfies PJR.  Each loop pass (including the
    final stopping check) is recorded in ``trace`` when given.
    """
    if len(solution.committee) != instance.k:
        raise ValueError("ls_pjr needs a full committee")
    infinite = isinstance(eps, float) and math.isinf(eps)
    if not infinite:
        eps = instance.num(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
    t_hat = instance.t_hat
    # weights on non-committee edges carry no meaning here
    members = set(solution.committee)
    solution = Solution(solution.committee,
                        {e: w for e, w in solution.weights.items() if e[1] in members and w > 0})
    while True:
        supports = solution.supports
        t_min = min(supports.values())
        c_min = min(c for c in solution.committee if supports[c] == t_min)
        top = max_score(instance, solution)
        stop_at = t_hat if infinite else min((1 + eps) * t_min, t_hat)
        done = top.value < stop_at
        if trace is not None:
            trace.append({"t_min": t_min, "removed": None if done else c_min,
                          "t_max": top.value, "added": None if done else top.candidate})
        if done:
            return solution
        solution = insert(instance, remove(solution, c_min), top.candidate, top.value)
