"""Network-flow helpers on the voter/candidate approval graph.

Flow vectors are sparse dicts ``{(voter, candidate): value}``; a positive
value is flow from the voter toward the candidate.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .instance import ElectionInstance, Solution
from .numeric import EPS_ABS, EPS_REL, Number, approx_ge, is_exact, is_zero


class SubflowError(ValueError):
    pass


class _Network:
    """Dinic max-flow over a small directed graph with generic number types."""

    def __init__(self, size: int, zero_tol=0):
        self.graph = [[] for _ in range(size)]
        self.zero_tol = zero_tol

    def add_edge(self, u: int, v: int, cap) -> tuple:
        self.graph[u].append([v, cap, len(self.graph[v])])
        self.graph[v].append([u, cap * 0, len(self.graph[u]) - 1])
        return (u, len(self.graph[u]) - 1)

    def flow_on(self, handle, original):
        u, i = handle
        return original - self.graph[u][i][1]

    def _levels(self, s, t):
        level = [-1] * len(self.graph)
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, cap, _ in self.graph[u]:
                if cap > self.zero_tol and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _push(self, u, t, limit, level, it):
        if u == t:
            return limit
        edges = self.graph[u]
        while it[u] < len(edges):
            edge = edges[it[u]]
            v, cap, rev = edge
            if cap > self.zero_tol and level[v] == level[u] + 1:
                pushed = self._push(v, t, min(limit, cap), level, it)
                if pushed > self.zero_tol:
                    edge[1] -= pushed
                    self.graph[v][rev][1] += pushed
                    return pushed
            it[u] += 1
        return 0

    def max_flow(self, s: int, t: int, bound):
        total = bound * 0
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            it = [0] * len(self.graph)
            while True:
                pushed = self._push(s, t, bound, level, it)
                if not pushed or pushed <= self.zero_tol:
                    break
                total += pushed

    def reachable(self, s: int) -> set:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, cap, _ in self.graph[u]:
                if cap > self.zero_tol and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen


def committee_flow(instance: ElectionInstance, members, voters, demand):
    """Max flow from ``voters`` (capacity = stake) to ``members`` (capacity = demand[c]).

    Returns ``(weights, value, unreachable)`` where ``unreachable`` is the set
    of members on the sink side of the minimal-source-side min cut.
    """
    members = list(members)
    voters = list(voters)
    member_set = set(members)
    m_index = {c: 1 + len(voters) + i for i, c in enumerate(members)}
    source, sink = 0, 1 + len(voters) + len(members)
    total = sum((instance.stakes[n] for n in voters), instance.num(0))
    tol = 0 if instance.exact else EPS_ABS + EPS_REL * float(total)
    net = _Network(sink + 1, tol)
    big = total + 1  # never saturated: a voter carries at most its stake
    handles = {}
    for i, n in enumerate(voters):
        net.add_edge(source, 1 + i, instance.stakes[n])
        for c in instance.approvals[n]:
            if c in member_set:
                handles[(n, c)] = net.add_edge(1 + i, m_index[c], big)
    for c in members:
        net.add_edge(m_index[c], sink, demand[c])
    value = net.max_flow(source, sink, big)
    weights = {}
    for edge, handle in handles.items():
        f = net.flow_on(handle, big)
        if f > tol:
            weights[edge] = f
    reach = net.reachable(source)
    unreachable = {c for c in members if m_index[c] not in reach}
    return weights, value, unreachable


@dataclass
class MaxSupportResult:
    """Outcome of a floor-feasibility test.

    When infeasible, ``witness`` is a sub-committee whose approvers' total
    stake ``witness_stake`` is below ``len(witness) * floor``.
    """

    feasible: bool
    weights: dict = field(default_factory=dict)
    witness: tuple = ()
    witness_stake: Number = 0

    def __bool__(self):
        return self.feasible


def max_support_flow(instance: ElectionInstance, committee, floor) -> MaxSupportResult:
    committee = sorted(set(committee))
    for c in committee:
        if not 0 <= c < instance.candidate_count:
            raise ValueError(f"unknown candidate {c}")
    floor = instance.num(floor)
    if not committee or floor <= 0:
        return MaxSupportResult(True, {})
    voters = sorted({n for c in committee for n in instance.approvers[c]})
    weights, value, unreachable = committee_flow(
        instance, committee, voters, {c: floor for c in committee}
    )
    if approx_ge(value, floor * len(committee)):
        return MaxSupportResult(True, weights)
    witness = tuple(sorted(unreachable)) or tuple(committee)
    stake = sum((instance.stakes[n] for n in {n for c in witness for n in instance.approvers[c]}),
                instance.num(0))
    return MaxSupportResult(False, {}, witness, stake)


# ---------------------------------------------------------------- flow vectors


def flow_between(w: dict, w_prime: dict) -> dict:
    """The flow ``w_prime - w`` with zero entries dropped."""
    f = {}
    for e in set(w) | set(w_prime):
        d = w_prime.get(e, 0) - w.get(e, 0)
        if d != 0:
            f[e] = d
    return f


def excesses(f: dict) -> dict:
    """Net excess per vertex; vertices are ``("n", id)`` or ``("c", id)``."""
    out = {}
    for (n, c), x in f.items():
        out[("n", n)] = out.get(("n", n), 0) + x
        out[("c", c)] = out.get(("c", c), 0) - x
    return out


@dataclass
class Decomposition:
    paths: list = field(default_factory=list)  # (vertex list, value)
    cycles: list = field(default_factory=list)  # (vertex list without repeat, value)

    def recompose(self) -> dict:
        f = {}
        for vertices, value in self.paths:
            _add_walk(f, vertices, value)
        for vertices, value in self.cycles:
            _add_walk(f, vertices + [vertices[0]], value)
        return {e: x for e, x in f.items() if x != 0}


def _add_walk(f: dict, vertices, value):
    for a, b in zip(vertices, vertices[1:]):
        if a[0] == "n":
            e, x = (a[1], b[1]), value
        else:
            e, x = (b[1], a[1]), -value
        f[e] = f.get(e, 0) + x


def _out_arcs(f: dict, tol):
    """Directed residual arcs: vertex -> sorted list of (neighbour, amount)."""
    arcs = {}
    for (n, c), x in f.items():
        if x > tol:
            arcs.setdefault(("n", n), {})[("c", c)] = x
        elif x < -tol:
            arcs.setdefault(("c", c), {})[("n", n)] = -x
    return arcs


def _vertex_key(v):
    return (0 if v[0] == "n" else 1, v[1])


def decompose(f: dict) -> Decomposition:
    """Split a flow into simple paths (excess -> demand) and cycles.

    Walks always take the lowest-id neighbour, so the output is deterministic.
    """
    values = [abs(x) for x in f.values()]
    scale = max(values, default=0)
    tol = 0 if is_exact(*f.values()) else EPS_ABS + EPS_REL * scale
    arcs = _out_arcs(f, tol)
    excess = excesses(f)
    out = Decomposition()

    def take(u, v, amount):
        arcs[u][v] -= amount
        if arcs[u][v] <= tol:
            del arcs[u][v]
            if not arcs[u]:
                del arcs[u]

    def next_vertex(u):
        return min(arcs[u], key=_vertex_key)

    def walk(start, stop_at_demand):
        path = [start]
        position = {start: 0}
        while True:
            u = path[-1]
            if stop_at_demand and len(path) > 1 and excess.get(u, 0) < -tol:
                return path, None
            if u not in arcs:
                # only reachable through rounding residue
                return (path, None) if len(path) > 1 else (None, None)
            v = next_vertex(u)
            if v in position:
                return path, position[v]
            position[v] = len(path)
            path.append(v)

    def cancel_cycle(path, i):
        cycle = path[i:]
        edges = list(zip(cycle, cycle[1:] + [cycle[0]]))
        amount = min(arcs[a][b] for a, b in edges)
        for a, b in edges:
            take(a, b, amount)
        out.cycles.append((cycle, amount))

    while True:
        sources = sorted((v for v, x in excess.items() if x > tol and v in arcs), key=_vertex_key)
        if not sources:
            break
        start = sources[0]
        path, cycle_at = walk(start, True)
        if path is None:
            excess[start] = 0
            continue
        if cycle_at is not None:
            cancel_cycle(path, cycle_at)
            continue
        edges = list(zip(path, path[1:]))
        amount = min([arcs[a][b] for a, b in edges] + [excess[start], -excess[path[-1]]])
        for a, b in edges:
            take(a, b, amount)
        excess[start] -= amount
        excess[path[-1]] += amount
        out.paths.append((path, amount))

    while arcs:
        start = min(arcs, key=_vertex_key)
        path, cycle_at = walk(start, False)
        if path is None or cycle_at is None:
            break
        cancel_cycle(path, cycle_at)
    return out


def is_subflow(fprime: dict, f: dict, tol=0) -> tuple:
    """Check the sub-flow relation; returns ``(ok, offending item)``."""
    for e, x in fprime.items():
        if x == 0:
            continue
        y = f.get(e, 0)
        if x * y <= 0 or abs(x) > abs(y) + tol:
            return False, ("edge", e)
    ex_f, ex_p = excesses(f), excesses(fprime)
    for v, x in ex_p.items():
        if abs(x) <= tol:
            continue
        y = ex_f.get(v, 0)
        if x * y <= 0 or abs(x) > abs(y) + tol:
            return False, ("vertex", v)
    return True, None


def apply_subflow(instance: ElectionInstance, w: dict, fprime: dict, reference: dict | None = None,
                  check: bool = True) -> dict:
    """Return ``w + fprime``.

    With ``reference`` (the full flow ``w' - w``) the sub-flow relation is
    checked first.  With ``check`` the result is verified to be non-negative
    and feasible; either failure raises ``SubflowError``.
    """
    tol = 0 if instance.exact else EPS_ABS + EPS_REL * float(instance.total_stake)
    if reference is not None:
        ok, where = is_subflow(fprime, reference, tol)
        if not ok:
            raise SubflowError(f"not a sub-flow at {where}")
    out = dict(w)
    for e, x in fprime.items():
        out[e] = out.get(e, 0) + x
    if check:
        spent = {}
        for (n, c), x in out.items():
            if x < -tol:
                raise SubflowError(f"negative weight on edge {(n, c)}")
            spent[n] = spent.get(n, 0) + x
        for n, total in spent.items():
            if total > instance.stakes[n] + tol:
                raise SubflowError(f"voter {n} overspends: {total} > {instance.stakes[n]}")
    if instance.exact:
        return {e: x for e, x in out.items() if x != 0}
    return {e: x for e, x in out.items() if abs(x) > tol}


# ---------------------------------------------------------------- forest trimming


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _tree_path(adjacency, a, b):
    prev = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            break
        for v in sorted(adjacency.get(u, ()), key=_vertex_key):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def _first_cycle(weights: dict):
    """A cycle of positive edges as an ordered vertex list, or None."""
    parent = {}
    adjacency = {}
    for n, c in sorted(weights):
        u, v = ("n", n), ("c", c)
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = _find(parent, u), _find(parent, v)
        if ru == rv:
            return _tree_path(adjacency, v, u)  # v ... u, closed by edge u-v
        parent[ru] = rv
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    return None


def trim_to_forest(instance: ElectionInstance, solution: Solution) -> Solution:
    """Cancel cycles among positive edges until they form a forest.

    Each cancellation alternates -delta/+delta around the cycle, which keeps
    every voter's spend and every candidate's support unchanged and zeroes at
    least one edge.  Weights on non-committee edges are dropped first.
    """
    members = set(solution.committee)
    weights = {e: x for e, x in solution.weights.items() if e[1] in members and x > 0}
    while True:
        cycle = _first_cycle(weights)
        if cycle is None:
            break
        edges = []
        for a, b in zip(cycle, cycle[1:] + [cycle[0]]):
            edges.append((a[1], b[1]) if a[0] == "n" else (b[1], a[1]))
        minus, plus = edges[0::2], edges[1::2]
        # cancel in whichever direction zeroes the lighter edge
        if min(weights[e] for e in plus) < min(weights[e] for e in minus):
            minus, plus = plus, minus
        delta = min(weights[e] for e in minus)
        zeroed = min((e for e in minus if weights[e] == delta))
        for e in minus:
            weights[e] -= delta
        for e in plus:
            weights[e] += delta
        weights[zeroed] = 0
        weights = {e: x for e, x in weights.items()
                   if x > 0 and (instance.exact or not is_zero(x, instance.total_stake))}
    return Solution(solution.committee, weights)


def is_forest(edges) -> bool:
    parent = {}
    for n, c in edges:
        u, v = ("n", n), ("c", c)
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = _find(parent, u), _find(parent, v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True
