"""Checks a verifier runs on an untrusted submitted solution.

``verify_full`` recomputes everything from the raw weights, touching each
approval edge a bounded number of times (counted in ``edge_visits``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .instance import ElectionInstance, Solution
from .numeric import Number, approx_eq, approx_ge, approx_gt, approx_le, format_number
from .phragmms import max_prescore


@dataclass
class VerifyReport:
    feasible: bool
    balanced: bool | None
    local_optimal: bool | None
    objective: Number | None
    full: bool = False
    pjr_t: Number | None = None
    pjr_condition: bool | None = None
    witness: dict | None = None
    edge_visits: int = 0

    @property
    def passed(self) -> bool:
        # None marks a test that was not run
        checks = (self.balanced, self.local_optimal, self.pjr_condition)
        return self.feasible and all(x is not False for x in checks)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        for key in ("objective", "pjr_t"):
            if out[key] is not None:
                out[key] = _jsonable(out[key])
        if self.witness:
            out["witness"] = {k: _jsonable(v) for k, v in self.witness.items()}
        return out


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, float)) or hasattr(x, "denominator"):
        return format_number(x)
    return x


def _rejected(witness: dict, visits: int = 0) -> VerifyReport:
    return VerifyReport(False, False, False, None, witness=witness, edge_visits=visits)


@dataclass
class _Scan:
    visits: int
    supports: dict
    on_committee: list
    by_voter: dict
    witness: dict | None = None


def _committee_problem(instance, committee):
    if len(set(committee)) != len(committee):
        return {"kind": "repeated_member"}
    for c in committee:
        if not isinstance(c, int) or not 0 <= c < instance.candidate_count:
            return {"kind": "unknown_candidate", "candidate": c}
    return None


def _feasibility_pass(instance: ElectionInstance, solution: Solution) -> _Scan:
    """One pass over the submitted weights: well-formedness, spend, supports."""
    members = set(solution.committee)
    spent = [instance.num(0)] * instance.n_voters
    scan = _Scan(0, {c: instance.num(0) for c in solution.committee},
                 [instance.num(0)] * instance.n_voters, {})
    for (n, c), w in solution.weights.items():
        scan.visits += 1
        if not (isinstance(n, int) and 0 <= n < instance.n_voters) or c not in instance.approvals[n]:
            scan.witness = {"kind": "not_an_edge", "voter": n, "candidate": c}
            return scan
        if w < 0:
            scan.witness = {"kind": "negative_weight", "voter": n, "candidate": c, "weight": w}
            return scan
        spent[n] += w
        if c in members:
            scan.on_committee[n] += w
            scan.supports[c] += w
            if w > 0:
                scan.by_voter.setdefault(n, []).append((c, w))
    for n in range(instance.n_voters):
        if not approx_le(spent[n], instance.stakes[n]):
            scan.witness = {"kind": "overspent", "voter": n, "spent": spent[n],
                            "stake": instance.stakes[n]}
            return scan
    return scan


def verify_feasible(instance: ElectionInstance, solution: Solution) -> VerifyReport:
    """Feasibility and objective only; balancedness and local optimality are left unchecked."""
    problem = _committee_problem(instance, list(solution.committee))
    if problem is not None:
        return _rejected(problem)
    scan = _feasibility_pass(instance, solution)
    if scan.witness is not None:
        return _rejected(scan.witness, scan.visits)
    objective = min(scan.supports.values()) if solution.committee else math.inf
    return VerifyReport(True, None, None, objective, full=len(solution.committee) == instance.k,
                        edge_visits=scan.visits)


def verify_full(instance: ElectionInstance, solution: Solution, pjr_t=None) -> VerifyReport:
    """Full check of a submitted solution: feasibility, balancedness, local optimality.

    Local optimality is tested as ``t >= max prescore(c', t)`` at
    ``t = least member support``.  Hostile input (unknown ids, non-edges,
    negative weights, repeated members) is reported as infeasible.
    """
    committee = list(solution.committee)
    members = set(committee)
    problem = _committee_problem(instance, committee)
    if problem is not None:
        return _rejected(problem)
    scan = _feasibility_pass(instance, solution)
    if scan.witness is not None:
        return _rejected(scan.witness, scan.visits)
    visits, supports, on_committee, by_voter = scan.visits, scan.supports, scan.on_committee, scan.by_voter

    objective = min(supports.values()) if committee else math.inf
    report = VerifyReport(True, True, True, objective, full=len(committee) == instance.k)

    # pass 2 over all edges: least support among each voter's committee neighbours
    lowest = [None] * instance.n_voters
    for n, approved in enumerate(instance.approvals):
        for c in approved:
            visits += 1
            if c in members and (lowest[n] is None or supports[c] < lowest[n]):
                lowest[n] = supports[c]

    # pass 3 over positive committee weights: balancedness and slacks at t
    t = objective
    slacks = list(instance.stakes)
    for n in range(instance.n_voters):
        if lowest[n] is not None and report.balanced and not approx_eq(on_committee[n], instance.stakes[n]):
            report.balanced = False
            report.witness = {"kind": "unspent_stake", "voter": n, "spent": on_committee[n],
                              "stake": instance.stakes[n]}
        for c, w in by_voter.get(n, ()):
            visits += 1
            if report.balanced and not approx_eq(supports[c], lowest[n]):
                report.balanced = False
                report.witness = {"kind": "edge_above_minimum", "voter": n, "candidate": c,
                                  "support": supports[c], "minimum": lowest[n]}
            slacks[n] -= w * t / supports[c] if supports[c] > t else w

    # pass 4 over edges of unelected candidates: pre-scores at t
    if committee and len(members) < instance.candidate_count:
        best, best_value = None, None
        for c in range(instance.candidate_count):
            if c in members:
                continue
            value = instance.num(0)
            for n in instance.approvers[c]:
                visits += 1
                value += slacks[n]
            if best is None or value > best_value:
                best, best_value = c, value
        if not approx_ge(t, best_value):
            report.local_optimal = False
            if report.witness is None:
                report.witness = {"kind": "candidate_above_support", "candidate": best,
                                  "prescore": best_value, "threshold": t}

    if pjr_t is not None:
        report.pjr_t = instance.num(pjr_t)
        report.pjr_condition = pjr_condition(instance, solution, report.pjr_t)
    report.edge_visits = visits
    return report


def pjr_condition(instance: ElectionInstance, solution: Solution, t) -> bool:
    """Sufficient test for t-PJR: every unelected pre-score at ``t`` is below ``t``."""
    t = instance.num(t)
    if len(solution.committee) >= instance.candidate_count:
        return True
    return max_prescore(instance, solution, t).value < t


def compare_solutions(instance: ElectionInstance, incumbent: Solution | None,
                      challenger: Solution) -> int:
    """+1 if the challenger's objective is strictly better beyond tolerance,
    0 if the two tie within tolerance, -1 if it is worse."""
    if incumbent is None:
        return 1
    old, new = incumbent.objective, challenger.objective
    if approx_gt(new, old):
        return 1
    if approx_eq(new, old):
        return 0
    return -1


__all__ = ["VerifyReport", "verify_full", "verify_feasible", "pjr_condition", "compare_solutions"]
