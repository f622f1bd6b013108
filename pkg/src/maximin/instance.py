"""Election instances, solutions, their JSON forms, and instance generators."""
from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .numeric import Number, format_number, to_exact, to_float

Edge = tuple  # (voter id, candidate id)


class InstanceError(ValueError):
    """Raised for invalid instances; ``entity`` names the offending item."""

    def __init__(self, message: str, entity=None):
        super().__init__(message)
        self.entity = entity


class SolutionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ElectionInstance:
    """Bipartite approval graph with per-voter stake and a committee size.

    Voters and candidates are dense integer ids; ``approvals[n]`` is the
    sorted tuple of candidates approved by voter ``n``.
    """

    k: int
    stakes: tuple
    approvals: tuple
    candidate_count: int
    voter_names: tuple = ()
    candidate_names: tuple = ()
    approvers: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n_voters = len(self.stakes)
        if len(self.approvals) != n_voters:
            raise InstanceError("stakes and approvals differ in length")
        if not self.voter_names:
            object.__setattr__(self, "voter_names", _default_names("n", n_voters))
        if not self.candidate_names:
            object.__setattr__(
                self, "candidate_names", _default_names("c", self.candidate_count)
            )
        if not 0 < self.k < self.candidate_count:
            raise InstanceError(
                f"k out of range: need 0 < k < {self.candidate_count}, got {self.k}",
                entity="k",
            )
        approvals = []
        approvers = [[] for _ in range(self.candidate_count)]
        for n, (stake, approved) in enumerate(zip(self.stakes, self.approvals)):
            name = self.voter_names[n]
            if stake < 0:
                raise InstanceError(f"negative stake for voter {name}: {stake}", entity=name)
            if stake == 0:
                raise InstanceError(f"zero stake for voter {name}", entity=name)
            approved = tuple(sorted(set(approved)))
            if not approved:
                raise InstanceError(f"isolated vertex {name}", entity=name)
            for c in approved:
                if not 0 <= c < self.candidate_count:
                    raise InstanceError(f"voter {name} approves unknown candidate {c}", entity=name)
                approvers[c].append(n)
            approvals.append(approved)
        for c, voters in enumerate(approvers):
            if not voters:
                name = self.candidate_names[c]
                raise InstanceError(f"isolated vertex {name}", entity=name)
        object.__setattr__(self, "approvals", tuple(approvals))
        object.__setattr__(self, "approvers", tuple(tuple(v) for v in approvers))
        object.__setattr__(self, "stakes", tuple(self.stakes))

    @property
    def n_voters(self) -> int:
        return len(self.stakes)

    @property
    def exact(self) -> bool:
        return all(isinstance(s, (Fraction, int)) for s in self.stakes)

    @property
    def total_stake(self) -> Number:
        return sum(self.stakes, self.num(0))

    @property
    def t_hat(self) -> Number:
        """Average support available per seat, the standard PJR threshold."""
        return self.total_stake / self.k

    def edges(self):
        for n, approved in enumerate(self.approvals):
            for c in approved:
                yield (n, c)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.approvals)

    def num(self, x) -> Number:
        """Convert ``x`` into this instance's number type."""
        if self.exact:
            return to_exact(x)
        return to_float(x)

    def approval_stake(self, c: int) -> Number:
        return sum((self.stakes[n] for n in self.approvers[c]), self.num(0))

    def to_exact(self) -> "ElectionInstance":
        if self.exact:
            return self
        return ElectionInstance(
            self.k, tuple(to_exact(s) for s in self.stakes), self.approvals,
            self.candidate_count, self.voter_names, self.candidate_names,
        )

    def to_float(self) -> "ElectionInstance":
        return ElectionInstance(
            self.k, tuple(float(s) for s in self.stakes), self.approvals,
            self.candidate_count, self.voter_names, self.candidate_names,
        )

    def candidate_id(self, name: str) -> int:
        return self.candidate_names.index(name)


@dataclass(frozen=True)
class Solution:
    """A committee together with a sparse weight vector over approval edges.

    ``supports`` is derived from ``weights`` at construction time.
    """

    committee: tuple
    weights: Mapping = field(default_factory=dict)
    supports: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "committee", tuple(self.committee))
        supports = {c: 0 for c in self.committee}
        for (n, c), w in self.weights.items():
            if c in supports:
                supports[c] = supports[c] + w
        object.__setattr__(self, "supports", supports)

    @property
    def objective(self) -> Number:
        """Least member support; infinite for an empty committee."""
        if not self.committee:
            return math.inf
        return min(self.supports.values())

    def is_full(self, instance: ElectionInstance) -> bool:
        return len(self.committee) == instance.k

    def positive_edges(self) -> list:
        return sorted(e for e, w in self.weights.items() if w > 0)


def empty_solution() -> Solution:
    return Solution((), {})


def _default_names(prefix: str, count: int) -> tuple:
    width = len(str(max(count - 1, 0)))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(count))


# ---------------------------------------------------------------- JSON forms


def parse_instance(text: str, exact: bool = False) -> ElectionInstance:
    """Read an instance; in exact mode decimal literals are taken as written."""
    try:
        data = json.loads(text, parse_float=Fraction if exact else float)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(data, exact=exact)


def instance_from_dict(data: Mapping, exact: bool = False) -> ElectionInstance:
    if not isinstance(data, Mapping):
        raise InstanceError("instance must be a JSON object")
    for key in ("k", "candidates", "voters"):
        if key not in data:
            raise InstanceError(f"schema violation: missing key {key!r}", entity=key)
    k = data["k"]
    if not isinstance(k, int) or isinstance(k, bool):
        raise InstanceError("schema violation: k must be an integer", entity="k")
    candidates = data["candidates"]
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise InstanceError("schema violation: candidates must be a list of strings", entity="candidates")
    if len(set(candidates)) != len(candidates):
        raise InstanceError("schema violation: duplicate candidate name", entity="candidates")
    index = {name: i for i, name in enumerate(candidates)}

    voters = data["voters"]
    if not isinstance(voters, list):
        raise InstanceError("schema violation: voters must be a list", entity="voters")
    default_ids = _default_names("v", len(voters))
    names, stakes, approvals = [], [], []
    for i, voter in enumerate(voters):
        if not isinstance(voter, Mapping) or "stake" not in voter or "approvals" not in voter:
            raise InstanceError(f"schema violation: voter #{i} needs stake and approvals", entity=i)
        name = str(voter.get("id", default_ids[i]))
        try:
            stake = to_exact(voter["stake"]) if exact else to_float(voter["stake"])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"schema violation: bad stake for voter {name}", entity=name) from exc
        if stake < 0:
            raise InstanceError(f"negative stake for voter {name}: {voter['stake']}", entity=name)
        approved = []
        for cname in voter["approvals"]:
            if cname not in index:
                raise InstanceError(f"voter {name} approves unknown candidate {cname!r}", entity=name)
            approved.append(index[cname])
        names.append(name)
        stakes.append(stake)
        approvals.append(approved)
    if len(set(names)) != len(names):
        raise InstanceError("schema violation: duplicate voter id", entity="voters")
    return ElectionInstance(k, tuple(stakes), tuple(approvals), len(candidates),
                            tuple(names), tuple(candidates))


def instance_to_dict(instance: ElectionInstance) -> dict:
    """Canonical form: voters and candidates sorted by name."""
    cnames = instance.candidate_names
    voters = []
    for n in sorted(range(instance.n_voters), key=lambda n: instance.voter_names[n]):
        voters.append({
            "id": instance.voter_names[n],
            "stake": format_number(instance.stakes[n]),
            "approvals": sorted(cnames[c] for c in instance.approvals[n]),
        })
    return {"k": instance.k, "candidates": sorted(cnames), "voters": voters}


def serialize_instance(instance: ElectionInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1)


def solution_to_dict(instance: ElectionInstance, solution: Solution) -> dict:
    vn, cn = instance.voter_names, instance.candidate_names
    weights = [
        {"voter": vn[n], "candidate": cn[c], "weight": format_number(w)}
        for (n, c), w in sorted(solution.weights.items())
        if w != 0
    ]
    out = {"committee": [cn[c] for c in solution.committee], "weights": weights}
    if solution.committee:
        out["objective"] = format_number(solution.objective)
    return out


def serialize_solution(instance: ElectionInstance, solution: Solution) -> str:
    return json.dumps(solution_to_dict(instance, solution), indent=1)


def parse_solution(instance: ElectionInstance, text: str) -> Solution:
    """Map a solution file back onto instance ids.

    Unknown names raise ``SolutionFormatError``; semantic problems such as
    negative weights or non-edges are left for the verifier to report.
    """
    try:
        data = json.loads(text, parse_float=Fraction if instance.exact else float)
        committee_names = data["committee"]
        entries = data.get("weights", [])
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise SolutionFormatError(f"malformed solution: {exc}") from exc
    cindex = {name: i for i, name in enumerate(instance.candidate_names)}
    vindex = {name: i for i, name in enumerate(instance.voter_names)}
    try:
        committee = tuple(cindex[name] for name in committee_names)
    except (KeyError, TypeError) as exc:
        raise SolutionFormatError(f"unknown candidate in committee: {exc}") from exc
    weights = {}
    for entry in entries:
        try:
            n, c = vindex[entry["voter"]], cindex[entry["candidate"]]
            w = instance.num(entry["weight"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SolutionFormatError(f"bad weight entry {entry!r}") from exc
        weights[(n, c)] = weights.get((n, c), 0) + w
    return Solution(committee, weights)


# ---------------------------------------------------------------- generators


def harmonic(k: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def gen_phragmen_worstcase(k: int, eps, exact: bool = False) -> ElectionInstance:
    """Instance on which sequential Phragmén is off by a factor H_k - eps.

    Voter n0 (stake 1/(H_k - eps)) approves only c0; voter n_j (unit stake)
    approves c_1..c_j.  The committee {c_1..c_k} reaches support 1.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    hk = harmonic(k)
    eps_q = to_exact(eps)
    if not 0 < eps_q < hk:
        raise ValueError(f"eps must lie in (0, H_k) = (0, {float(hk)})")
    s0 = 1 / (hk - eps_q)
    stakes = [s0] + [Fraction(1)] * k
    if not exact:
        stakes = [1 / (float(hk) - float(eps))] + [1.0] * k
    approvals = [(0,)] + [tuple(range(1, j + 1)) for j in range(1, k + 1)]
    return ElectionInstance(k, tuple(stakes), tuple(approvals), k + 1)


def gen_cubic_gap(graph, k: int, exact: bool = True) -> ElectionInstance:
    """One candidate per vertex, one unit voter per edge of a cubic graph.

    ``graph`` is an adjacency list (sequence or mapping vertex -> neighbours).
    """
    adjacency = dict(graph) if isinstance(graph, Mapping) else dict(enumerate(graph))
    vertices = sorted(adjacency)
    position = {v: i for i, v in enumerate(vertices)}
    edges = set()
    for v in vertices:
        neighbours = set(adjacency[v])
        if len(neighbours) != 3 or len(adjacency[v]) != 3 or v in neighbours:
            raise ValueError(f"graph is not cubic: vertex {v} has neighbours {list(adjacency[v])}")
        for u in neighbours:
            if u not in adjacency or v not in adjacency[u]:
                raise ValueError(f"adjacency is not symmetric at edge {v}-{u}")
            edges.add(tuple(sorted((position[v], position[u]))))
    edges = sorted(edges)
    one = Fraction(1) if exact else 1.0
    return ElectionInstance(k, tuple(one for _ in edges), tuple(edges), len(vertices))


def complete_graph_k4() -> dict:
    return {v: [u for u in range(4) if u != v] for v in range(4)}


def complete_bipartite_k33() -> dict:
    left, right = [0, 1, 2], [3, 4, 5]
    adjacency = {v: list(right) for v in left}
    adjacency.update({v: list(left) for v in right})
    return adjacency


_DIST = re.compile(r"^\s*(\w+)\s*(?:\(([^)]*)\))?\s*$")


def _stake_sampler(spec: str, rng: random.Random, exact: bool):
    match = _DIST.match(spec)
    if not match:
        raise ValueError(f"bad stake distribution {spec!r}")
    kind, args = match.group(1), match.group(2)
    params = [float(a) for a in args.split(",")] if args else []
    if kind == "unit":
        return lambda: Fraction(1) if exact else 1.0
    if kind == "integer":
        lo, hi = (int(p) for p in (params or [1, 10]))
        return lambda: Fraction(rng.randint(lo, hi)) if exact else float(rng.randint(lo, hi))
    if kind == "uniform":
        lo, hi = params or [0.5, 1.5]
        if lo <= 0:
            raise ValueError("uniform stakes need a positive lower bound")
        draw = lambda: rng.uniform(lo, hi)  # noqa: E731
    elif kind == "pareto":
        (alpha,) = params or [1.5]
        draw = lambda: rng.paretovariate(alpha)  # noqa: E731
    else:
        raise ValueError(f"unknown stake distribution {kind!r}")
    if exact:
        # round to 6 decimals so exact-mode stakes stay readable
        return lambda: Fraction(round(draw(), 6)).limit_denominator(10**6)
    return draw


def gen_random(voters: int, candidates: int, k: int, approval_prob: float = 0.5,
               stake_dist: str = "unit", seed: int = 0, exact: bool = False,
               max_tries: int = 1000) -> ElectionInstance:
    """Random approval instance; the same seed always yields the same instance."""
    if not 0 < approval_prob <= 1:
        raise ValueError("approval_prob must lie in (0, 1]")
    if voters < 1 or not 0 < k < candidates:
        raise ValueError("need voters >= 1 and 0 < k < candidates")
    rng = random.Random(seed)
    stake = _stake_sampler(stake_dist, rng, exact)
    for _ in range(max_tries):
        rows = []
        for _ in range(voters):
            for _ in range(max_tries):
                row = tuple(c for c in range(candidates) if rng.random() < approval_prob)
                if row:
                    break
            else:
                raise ValueError("approval_prob too small to sample nonempty ballots")
            rows.append(row)
        if len({c for row in rows for c in row}) == candidates:
            stakes = tuple(stake() for _ in range(voters))
            return ElectionInstance(k, stakes, tuple(rows), candidates)
    raise ValueError("could not sample an instance without isolated candidates")


def instance_from_ballots(k: int, ballots: Sequence, candidates: Iterable[str] | None = None,
                          exact: bool = True) -> ElectionInstance:
    """Small helper for hand-written instances: ``ballots`` is ``[(stake, names), ...]``."""
    names = list(candidates) if candidates is not None else sorted({c for _, cs in ballots for c in cs})
    data = {
        "k": k,
        "candidates": names,
        "voters": [{"id": f"v{i}", "stake": str(s) if exact else s, "approvals": list(cs)}
                   for i, (s, cs) in enumerate(ballots)],
    }
    return instance_from_dict(data, exact=exact)
