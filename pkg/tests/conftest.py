"""Shared fixtures: the bundled example models plus seeded random corpora.

The corpora are deterministic functions of fixed master seeds, so every
run sees the same models and the property-style tests are reproducible.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from railcheck.model import Model, mc_row, parse_model
from railcheck.numerics import max_reach
from railcheck.props import Atom, sat_states
from railcheck.search import ranked_rails
from railcheck.transform import AcyclicReduction, acyclic_reduce, make_absorbing

FIXTURES = Path(__file__).parent / "fixtures"

MC_CORPUS_SEED = 777
MDP_CORPUS_SEED = 778
DAG_CORPUS_SEED = 779


def load_model(name: str) -> Model:
    return parse_model((FIXTURES / name).read_text())


def reduce_to_psi(mc: Model):
    """Absorb the psi states and reduce; returns (reduction, psi set)."""
    psi = sat_states(mc, Atom("psi"))
    red = acyclic_reduce(make_absorbing(mc, psi))
    return red, psi


def truncated_rail_mass(red: AcyclicReduction, rail, max_steps: int = 500):
    """Mass of a rail's generators, summed by dynamic programming over
    path length; returns (settled mass, mass still undecided at cutoff).

    State (i, u) holds the probability of generator prefixes that have
    matched rail[..i] and currently sit at u inside rail[i]'s component.
    A step either stays in the component, advances to rail[i+1], or
    leaves the torrent; arriving at the final rail state settles.
    The true generator mass always lies in [settled, settled + undecided].
    """
    mc = red.origin
    scc_of = red.scc_of
    rail = tuple(rail)
    if len(rail) == 1:
        return 1.0, 0.0
    alive = {(0, rail[0]): 1.0}
    done = 0.0
    for _ in range(max_steps):
        nxt = {}
        for (i, u), mass in alive.items():
            for v, p in mc_row(mc, u):
                if scc_of[v] == scc_of[u]:
                    key = (i, v)
                elif v == rail[i + 1]:
                    if i + 2 == len(rail):
                        done += mass * p
                        continue
                    key = (i + 1, v)
                else:
                    continue
                nxt[key] = nxt.get(key, 0.0) + mass * p
        alive = nxt
        if math.fsum(alive.values()) < 1e-15:
            break
    return done, math.fsum(alive.values())


# random corpus builders

def _mc_doc(rng):
    # Layered chain: up to three strongly connected blocks (rings, so
    # every member has an internal move), forward edges everywhere else,
    # absorbing tail of target states plus an optional trap.
    n = int(rng.integers(5, 13))
    n_psi = int(rng.integers(1, 3))
    trap = bool(rng.random() < 0.4)
    interior = n - n_psi - (1 if trap else 0)
    blocks = []
    pos = 0 if rng.random() < 0.3 else 1
    for _ in range(int(rng.integers(1, 4))):
        if pos >= interior:
            break
        size = min(int(rng.integers(1, 4)), interior - pos)
        blocks.append((pos, size))
        pos += size + int(rng.integers(0, 3))
    block_of = {}
    for start, size in blocks:
        for k in range(size):
            block_of[start + k] = (start, size)
    names = ["s%d" % i for i in range(n)]
    rows = {}
    for s in range(interior):
        row = {}
        if s in block_of:
            start, size = block_of[s]
            row[start + (s - start + 1) % size] = float(rng.uniform(0.25, 0.75))
            lo = start + size
        else:
            lo = s + 1
        outs = list(range(lo, n))
        k = min(len(outs), int(rng.integers(1, 3)))
        picks = rng.choice(len(outs), size=k, replace=False)
        w = rng.uniform(0.2, 1.0, k)
        w = (1.0 - math.fsum(row.values())) * w / w.sum()
        for j, t in enumerate(picks):
            row[outs[int(t)]] = row.get(outs[int(t)], 0.0) + float(w[j])
        rows[names[s]] = [{names[t]: p for t, p in sorted(row.items())}]
    for s in range(interior, n):
        rows[names[s]] = [{names[s]: 1.0}]
    return {
        "states": names,
        "initial": names[0],
        "labels": {names[s]: ["psi"] for s in range(interior, interior + n_psi)},
        "transitions": rows,
    }


def _usable_mc(doc):
    m = parse_model(json.dumps(doc))
    psi = sat_states(m, Atom("psi"))
    if max_reach(m, psi)[m.initial] < 0.05:
        return None
    red = acyclic_reduce(make_absorbing(m, psi))
    rails = []
    for rail, mass in ranked_rails(red, psi):
        rails.append((rail, mass))
        if len(rails) > 40:
            return None
    if not rails:
        return None
    return m, psi, red, rails


def build_mc_corpus(count: int = 200, master: int = MC_CORPUS_SEED):
    out = []
    i = 0
    while len(out) < count:
        rng = np.random.default_rng([master, i])
        i += 1
        got = _usable_mc(_mc_doc(rng))
        if got is not None:
            out.append(got)
    return out


def _mdp_doc(rng):
    # Small MDP with unrestricted edges (cycles and self loops welcome);
    # the last two states are an absorbing goal and an absorbing sink.
    n = int(rng.integers(4, 7))
    names = ["q%d" % i for i in range(n)]
    rows = {}
    for s in range(n - 2):
        acts = []
        for _ in range(int(rng.integers(1, 4))):
            k = int(rng.integers(1, 4))
            picks = sorted(int(t) for t in rng.choice(n, size=k, replace=False))
            w = rng.uniform(0.1, 1.0, k)
            w = w / w.sum()
            acts.append({names[t]: float(p) for t, p in zip(picks, w)})
        rows[names[s]] = acts
    rows[names[n - 2]] = [{names[n - 2]: 1.0}]
    rows[names[n - 1]] = [{names[n - 1]: 1.0}]
    return {
        "states": names,
        "initial": names[0],
        "labels": {names[n - 2]: ["psi"]},
        "transitions": rows,
    }


def build_mdp_corpus(count: int = 100, master: int = MDP_CORPUS_SEED):
    return [
        parse_model(json.dumps(_mdp_doc(np.random.default_rng([master, i]))))
        for i in range(count)
    ]


def _dag_doc(rng):
    # Forward-only chain, so every component is trivial and each rail is
    # an ordinary path; terminal states split into targets and traps.
    n = int(rng.integers(5, 10))
    n_term = int(rng.integers(1, 3))
    n_psi = int(rng.integers(1, n_term + 1))
    interior = n - n_term
    names = ["a%d" % i for i in range(n)]
    rows = {}
    for s in range(interior):
        outs = list(range(s + 1, n))
        k = min(len(outs), int(rng.integers(1, 3)))
        picks = rng.choice(len(outs), size=k, replace=False)
        w = rng.uniform(0.2, 1.0, k)
        w = w / w.sum()
        row = {}
        for j, t in enumerate(picks):
            row[outs[int(t)]] = float(w[j])
        rows[names[s]] = [{names[t]: p for t, p in sorted(row.items())}]
    for s in range(interior, n):
        rows[names[s]] = [{names[s]: 1.0}]
    return {
        "states": names,
        "initial": names[0],
        "labels": {names[s]: ["psi"] for s in range(interior, interior + n_psi)},
        "transitions": rows,
    }


def _usable_dag(doc):
    got = _usable_mc(doc)
    if got is None:
        return None
    m, psi, red, rails = got
    if not 2 <= len(rails) <= 8:
        return None
    if math.fsum(mass for _, mass in rails) < 0.15:
        return None
    return m, psi, red, rails


def build_dag_corpus(count: int = 40, master: int = DAG_CORPUS_SEED):
    out = []
    i = 0
    while len(out) < count:
        rng = np.random.default_rng([master, i])
        i += 1
        got = _usable_dag(_dag_doc(rng))
        if got is not None:
            out.append(got)
    return out


# fixtures

@pytest.fixture(scope="session")
def m0():
    return load_model("m0.json")


@pytest.fixture(scope="session")
def big1():
    return load_model("big1.json")


@pytest.fixture(scope="session")
def mdp2():
    return load_model("mdp2.json")


@pytest.fixture(scope="session")
def fig5():
    return load_model("fig5.json")


@pytest.fixture(scope="session")
def m0_trap():
    return load_model("m0_trap.json")


@pytest.fixture
def m0_path():
    return FIXTURES / "m0.json"


@pytest.fixture
def big1_path():
    return FIXTURES / "big1.json"


@pytest.fixture
def mdp2_path():
    return FIXTURES / "mdp2.json"


@pytest.fixture(scope="session")
def mc_corpus():
    return build_mc_corpus()


@pytest.fixture(scope="session")
def mdp_corpus():
    return build_mdp_corpus()


@pytest.fixture(scope="session")
def dag_corpus():
    return build_dag_corpus()
