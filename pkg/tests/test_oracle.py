import json
import math

import pytest

from conftest import reduce_to_psi
from railcheck.model import parse_model
from railcheck.oracle import (
    OracleLimitError,
    brute_force_max_reach,
    enumerate_freach,
    monte_carlo_classify,
)

M0_TABLE = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.006, 0.00594, 0.0058806]


def test_enumerate_m0_table(m0):
    paths, undecided = enumerate_freach(m0, {3, 4}, 10)
    for got, want in zip(paths, M0_TABLE):
        assert got[1] == pytest.approx(want, abs=1e-12)
    # ranked by probability, heaviest first
    probs = [p for _, p in paths]
    assert probs == sorted(probs, reverse=True)
    # abandoned paths hold exactly max_len states: one hop off the
    # initial state plus max_len - 2 moves inside a loop
    assert undecided == pytest.approx(
        0.4 * 0.5 ** 8 + 0.6 * 0.99 ** 8, abs=1e-15
    )


def test_enumerate_counts_states_not_steps(m0):
    paths, _ = enumerate_freach(m0, {3, 4}, 2)
    assert paths == []
    paths, _ = enumerate_freach(m0, {3, 4}, 3)
    assert [p for p, _ in paths] == [(0, 1, 3), (0, 2, 4)]


def test_enumerate_stops_at_first_target_hit(m0):
    paths, _ = enumerate_freach(m0, {3, 4}, 12)
    for path, _ in paths:
        assert path[-1] in {3, 4}
        assert all(s not in {3, 4} for s in path[:-1])
    # prefix freedom comes with that
    seqs = [p for p, _ in paths]
    for a in seqs:
        for b in seqs:
            if a != b:
                assert a != b[: len(a)]


def test_enumerate_big1(big1):
    paths, undecided = enumerate_freach(big1, {3}, 4)
    assert paths == [((0, 1, 3), 0.5)]
    assert undecided == 0.5


def test_enumerate_mass_conservation(mc_corpus):
    for m, psi, red, rails in mc_corpus[:15]:
        paths, undecided = enumerate_freach(m, psi, 14)
        total = math.fsum(p for _, p in paths)
        assert total <= 1.0 + 1e-12
        assert undecided >= 0.0
        reach = math.fsum(mass for _, mass in rails)
        assert total - 1e-12 <= reach <= total + undecided + 1e-12


def test_brute_force_mdp2(mdp2):
    assert brute_force_max_reach(mdp2, {3}) == 0.8


def test_brute_force_on_chain(m0):
    assert brute_force_max_reach(m0, {3, 4}) == pytest.approx(1.0, abs=1e-12)


def test_brute_force_indifferent_actions():
    doc = {
        "states": ["x", "g"],
        "initial": "x",
        "labels": {"g": ["psi"]},
        "transitions": {
            "x": [{"g": 1.0}, {"x": 0.5, "g": 0.5}],
            "g": [{"g": 1.0}],
        },
    }
    m = parse_model(json.dumps(doc))
    assert brute_force_max_reach(m, {1}) == pytest.approx(1.0, abs=1e-12)


def test_brute_force_refuses_huge_scheduler_spaces():
    n = 19
    names = ["b%d" % i for i in range(n)]
    rows = {
        names[i]: [{names[i + 1]: 1.0}, {names[0]: 1.0}] for i in range(n - 2)
    }
    rows[names[n - 2]] = [{names[n - 1]: 1.0}]
    rows[names[n - 1]] = [{names[n - 1]: 1.0}]
    doc = {
        "states": names,
        "initial": names[0],
        "labels": {names[n - 1]: ["psi"]},
        "transitions": rows,
    }
    m = parse_model(json.dumps(doc))
    with pytest.raises(OracleLimitError, match="scheduler space"):
        brute_force_max_reach(m, {n - 1})


def test_classify_big1(big1):
    red, psi = reduce_to_psi(big1)
    run = monte_carlo_classify(red.origin, red, [(0, 1, 3)], 10000, seed=5)
    assert run.count == 10000
    assert run.classified == {(0, 1, 3): 10000}
    assert run.unclassified == 0
    assert run.seed == 5


def test_classify_m0(m0):
    red, psi = reduce_to_psi(m0)
    rails = [(0, 2, 4), (0, 1, 3)]
    run = monte_carlo_classify(red.origin, red, rails, 10000, seed=11)
    assert sum(run.classified.values()) + run.unclassified == 10000
    assert run.unclassified == 0
    for rail, mass in zip(rails, (0.6, 0.4)):
        freq = run.classified[rail] / run.count
        assert abs(freq - mass) <= 4 * math.sqrt(mass * (1 - mass) / run.count)


def test_classify_sees_the_trap(m0_trap):
    red, psi = reduce_to_psi(m0_trap)
    rails = [(0, 2, 4), (0, 1, 3)]
    run = monte_carlo_classify(red.origin, red, rails, 10000, seed=12)
    assert run.unclassified > 0
    assert abs(run.unclassified / run.count - 0.2) <= 4 * math.sqrt(0.2 * 0.8 / run.count)


def test_classify_is_deterministic(m0):
    red, psi = reduce_to_psi(m0)
    rails = [(0, 2, 4), (0, 1, 3)]
    a = monte_carlo_classify(red.origin, red, rails, 2000, seed=7)
    b = monte_carlo_classify(red.origin, red, rails, 2000, seed=7)
    assert a.classified == b.classified
    assert a.unclassified == b.unclassified
