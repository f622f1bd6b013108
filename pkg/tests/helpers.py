"""Shared fixtures-as-functions: the random corpus and hypothesis strategies."""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from hypothesis import strategies as st

from maximin.instance import ElectionInstance, gen_phragmen_worstcase, gen_random, instance_from_ballots

CORPUS_SIZE = 500


def fig3(exact=True) -> ElectionInstance:
    return gen_phragmen_worstcase(4, Fraction(1, 10) if exact else 0.1, exact=exact)


def toy() -> ElectionInstance:
    """u(4) -> {a, b}, v(2) -> {b}, k = 1."""
    return instance_from_ballots(1, [(4, ["a", "b"]), (2, ["b"])])


@lru_cache(maxsize=None)
def corpus(size: int = CORPUS_SIZE) -> tuple:
    """Deterministic exact instances with at most 8 voters, 8 candidates and k <= 4."""
    rng = random.Random(20240229)
    dists = ["unit", "integer(1,10)", "integer(1,3)", "uniform(0.5,5)"]
    out = []
    seed = 0
    while len(out) < size:
        seed += 1
        candidates = rng.randint(3, 8)
        voters = rng.randint(2, 8)
        k = rng.randint(1, min(4, candidates - 1))
        prob = rng.choice([0.3, 0.4, 0.5, 0.7])
        try:
            inst = gen_random(voters, candidates, k, prob, rng.choice(dists), seed=seed, exact=True)
        except ValueError:
            continue
        out.append(inst)
    return tuple(out)


@st.composite
def instances(draw, max_voters=7, max_candidates=6, max_k=3, exact=True):
    """Small valid instances with integer stakes."""
    n_cand = draw(st.integers(2, max_candidates))
    k = draw(st.integers(1, min(max_k, n_cand - 1)))
    n_vot = draw(st.integers(1, max_voters))
    ballots = []
    for _ in range(n_vot):
        approved = draw(st.sets(st.integers(0, n_cand - 1), min_size=1, max_size=n_cand))
        ballots.append((draw(st.integers(1, 9)), sorted(approved)))
    # cover every candidate so none is isolated
    covered = set().union(*(set(a) for _, a in ballots))
    for c in range(n_cand):
        if c not in covered:
            i = draw(st.integers(0, n_vot - 1))
            ballots[i] = (ballots[i][0], sorted(set(ballots[i][1]) | {c}))
    names = [f"c{c}" for c in range(n_cand)]
    inst = instance_from_ballots(k, [(s, [names[c] for c in a]) for s, a in ballots],
                                 candidates=names, exact=exact)
    return inst


@st.composite
def committees(draw, inst, min_size=1, max_size=None):
    size_cap = inst.candidate_count if max_size is None else min(max_size, inst.candidate_count)
    return tuple(draw(st.lists(st.integers(0, inst.candidate_count - 1), min_size=min_size,
                               max_size=size_cap, unique=True)))
