"""Deterministic simulation of an on-chain election window.

Provers compute solutions off-chain and submit them at fixed block heights.
The chain keeps a tentative winner and replaces it only by verified, strictly
better submissions.  At the end of the window the tentative winner is
declared the official winner.

Two admission modes are modelled:

* ``full_check``: every submission must pass ``verify_full``.
* ``optimized``: only the first admitted solution is fully verified; later
  ones are checked for feasibility and objective.  At the end of the window
  the tentative winner must satisfy the PJR sufficient condition at
  ``t_hat``; if it does not, its submitter is fined and the window is
  extended so that an honest prover can submit the LS-PJR post-processing of
  the tentative winner.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .flowcore import trim_to_forest
from .instance import ElectionInstance, Solution
from .numeric import format_number
from .solvers import (
    ls_pjr,
    solve_balanced_phragmms,
    solve_lazy_mms,
    solve_mms,
    solve_seq_phragmen,
)
from .verify import VerifyReport, compare_solutions, pjr_condition, verify_feasible, verify_full

STRATEGIES = ("balanced_phragmms", "seq_phragmen", "mms", "lazy_mms",
              "adversarial_overweight", "malformed")
HONEST = ("balanced_phragmms", "seq_phragmen", "mms", "lazy_mms")
MODES = {"full_check": "full_check", "full": "full_check", "optimized": "optimized"}

CHAIN = "chain"


@dataclass(frozen=True)
class ProverSpec:
    strategy: str
    submit_block: int
    threshold: object = None  # lazy_mms only
    name: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "lazy_mms" and self.threshold is None:
            raise ValueError("lazy_mms needs a threshold")

    @property
    def honest(self) -> bool:
        return self.strategy in HONEST


@dataclass
class ChainState:
    window: tuple
    mode: str
    block_height: int = 0
    tentative: tuple | None = None  # (solution, submitter, block, report)
    log: list = field(default_factory=list)
    admitted: list = field(default_factory=list)

    def emit(self, actor, action, objective=None, reason=None):
        self.log.append({
            "block": self.block_height,
            "actor": actor,
            "action": action,
            "objective": None if objective is None else _jsonable(objective),
            "reason": reason,
        })


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return format_number(x)


def trim_and_submit(instance: ElectionInstance, solution: Solution) -> Solution:
    """Reduce a feasible solution to a forest of positive edges before submission."""
    trimmed = trim_to_forest(instance, solution)
    edges = trimmed.positive_edges()
    assert len(edges) < instance.n_voters + instance.k, "trimmed solution is not a forest"
    return trimmed


def _prover_name(spec: ProverSpec, index: int) -> str:
    return spec.name or f"p{index}:{spec.strategy}"


def prover_solution(instance: ElectionInstance, spec: ProverSpec) -> Solution | None:
    """What a prover submits, or ``None`` when its algorithm produces nothing."""
    if spec.strategy == "lazy_mms":
        solution = solve_lazy_mms(instance, spec.threshold)
        return None if solution is None else trim_and_submit(instance, solution)
    if spec.strategy == "seq_phragmen":
        return trim_and_submit(instance, solve_seq_phragmen(instance))
    if spec.strategy == "mms":
        return trim_and_submit(instance, solve_mms(instance))
    honest = trim_and_submit(instance, solve_balanced_phragmms(instance))
    if spec.strategy == "balanced_phragmms":
        return honest
    if spec.strategy == "adversarial_overweight":
        # claims twice the real backing
        return Solution(honest.committee, {e: 2 * w for e, w in honest.weights.items()})
    # malformed: route weight over an edge that is not in the approval graph
    weights = dict(honest.weights)
    for n, approved in enumerate(instance.approvals):
        missing = [c for c in range(instance.candidate_count) if c not in approved]
        if missing:
            weights[(n, missing[0])] = instance.stakes[n]
            break
    else:
        first = min(weights)
        weights[first] = -weights[first]
    return Solution(honest.committee, weights)


def _reason(report: VerifyReport) -> str:
    if not report.feasible:
        w = report.witness or {}
        detail = " ".join(f"{k}={_jsonable(v) if not isinstance(v, str) else v}"
                          for k, v in w.items() if k != "kind")
        return f"infeasible:{w.get('kind', 'unknown')}" + (f" {detail}" if detail else "")
    if report.balanced is False:
        return "not_balanced"
    if report.local_optimal is False:
        return "not_locally_optimal"
    return "rejected"


def _admit(instance, state: ChainState, solution: Solution, actor: str, block: int,
           full_check: bool, require_pjr: bool = False, allow_tie: bool = False) -> bool:
    """Apply the admission rule and log the outcome."""
    report = verify_full(instance, solution) if full_check else verify_feasible(instance, solution)
    if not report.feasible:
        state.emit(actor, "rejected", None, _reason(report))
        return False
    if not report.full:
        state.emit(actor, "rejected", report.objective, "partial_committee")
        return False
    incumbent = state.tentative[0] if state.tentative else None
    order = compare_solutions(instance, incumbent, solution)
    if order < 0 or (order == 0 and not allow_tie):
        state.emit(actor, "rejected", report.objective, "not_better")
        return False
    if not report.passed:
        state.emit(actor, "rejected", report.objective, _reason(report))
        return False
    if require_pjr and not pjr_condition(instance, solution, instance.t_hat):
        state.emit(actor, "rejected", report.objective, "pjr_condition_failed")
        return False
    replaced = state.tentative is not None
    state.tentative = (solution, actor, block, report)
    state.admitted.append(actor)
    state.emit(actor, "admitted", report.objective, "replaced_tentative" if replaced else "first_tentative")
    return True


def run_window(instance: ElectionInstance, provers, mode: str = "full_check", window_len: int = 10,
               extension_len: int | None = None, ls_eps=math.inf,
               precomputed: dict | None = None) -> tuple:
    """Simulate one election window; returns ``(winner, log)``.

    ``winner`` is ``None`` when nothing was admitted.  Submissions are handled
    in (block, prover index) order.  ``extension_len`` defaults to ``k``
    blocks; during an extension the first honest prover submits
    ``ls_pjr(tentative, ls_eps)`` in the first extra block.
    ``precomputed`` maps prover indices to ready-made submissions that
    replace what their strategy would compute.
    """
    provers = list(provers)
    if not provers:
        raise ValueError("need at least one prover")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    mode = MODES[mode]
    if window_len < 1:
        raise ValueError("window_len must be positive")
    for spec in provers:
        if not 1 <= spec.submit_block <= window_len:
            raise ValueError(f"submit block {spec.submit_block} outside window 1..{window_len}")
    if extension_len is None:
        extension_len = instance.k

    state = ChainState(window=(1, window_len), mode=mode)
    precomputed = precomputed or {}
    solutions = {i: precomputed[i] if i in precomputed else prover_solution(instance, spec)
                 for i, spec in enumerate(provers)}
    schedule = sorted(range(len(provers)), key=lambda i: (provers[i].submit_block, i))

    for block in range(1, window_len + 1):
        state.block_height = block
        for i in schedule:
            spec = provers[i]
            if spec.submit_block != block:
                continue
            actor = _prover_name(spec, i)
            solution = solutions[i]
            if solution is None:
                state.emit(actor, "rejected", None, "no_solution")
                continue
            state.emit(actor, "submitted", solution.objective)
            full = mode == "full_check" or state.tentative is None
            _admit(instance, state, solution, actor, block, full)

    if mode == "optimized" and state.tentative is not None:
        solution, submitter = state.tentative[0], state.tentative[1]
        if not pjr_condition(instance, solution, instance.t_hat):
            state.emit(submitter, "fined", solution.objective, "pjr_condition_failed")
            end = window_len + extension_len
            state.window = (1, end)
            state.emit(CHAIN, "window_extended", solution.objective, f"until block {end}")
            helper = next((i for i in range(len(provers)) if provers[i].honest), None)
            if helper is not None and extension_len > 0:
                state.block_height = window_len + 1
                actor = _prover_name(provers[helper], helper)
                improved = trim_and_submit(instance, ls_pjr(instance, solution, ls_eps))
                state.emit(actor, "submitted", improved.objective, "ls_pjr")
                _admit(instance, state, improved, actor, state.block_height, False,
                       require_pjr=True, allow_tie=True)
            state.block_height = end

    if state.tentative is None:
        state.emit(CHAIN, "declared_winner", None, "no_admissible_solution")
        return None, state.log
    winner, submitter = state.tentative[0], state.tentative[1]
    state.emit(submitter, "declared_winner", winner.objective, None)
    for j, actor in enumerate(state.admitted):
        tag = "first" if j == 0 else "intermediate"
        if j == len(state.admitted) - 1:
            tag = "first_and_last" if j == 0 else "last"
        state.emit(actor, "rewarded", None, tag)
    return winner, state.log


def log_to_jsonl(log) -> str:
    return "".join(json.dumps(event) + "\n" for event in log)


def load_provers(data) -> list:
    """Prover list from parsed JSON: ``[{"strategy": ..., "submit_block": ...}, ...]``."""
    if isinstance(data, dict):
        data = data.get("provers", [])
    return [ProverSpec(d["strategy"], int(d["submit_block"]), d.get("threshold"), d.get("name"))
            for d in data]
