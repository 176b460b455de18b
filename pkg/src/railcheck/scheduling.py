"""Maximizing schedulers and their induced chains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

from .model import Model
from .numerics import max_reach, prob0_states

OPT_TOL = 1e-7


@dataclass(frozen=True)
class Scheduler:
    choice: Tuple[int, ...]  # state index to distribution index


def extract_max_scheduler(m: Model, target: Iterable[int]) -> Scheduler:
    """Deterministic memoryless scheduler attaining the maximal
    reachability probability at every state.

    A one-step optimal choice is not enough on its own: inside an end
    component a value-preserving loop can be optimal yet never reach the
    target. States are therefore settled outward from the target, each
    receiving the lowest-index optimal distribution that moves with
    positive probability into the settled region; the induced chain then
    reaches the absorbing boundary almost surely and realizes the values.
    """
    x = max_reach(m, target)
    target = set(target)
    zero = prob0_states(m, target)
    n = m.num_states
    choice = [0] * n
    settled = target | zero
    pending = [s for s in range(n) if s not in settled]
    while pending:
        remaining = []
        progressed = False
        for s in pending:
            picked = None
            for k, dist in enumerate(m.actions[s]):
                value = sum(p * x[t] for t, p in dist)
                if abs(value - x[s]) <= OPT_TOL and any(t in settled for t, _ in dist):
                    picked = k
                    break
            if picked is None:
                remaining.append(s)
            else:
                choice[s] = picked
                settled.add(s)
                progressed = True
        assert progressed, "no optimal distribution makes progress"
        pending = remaining
    return Scheduler(choice=tuple(choice))


def induced_mc(m: Model, sched: Scheduler) -> Model:
    """The Markov chain obtained by fixing one distribution per state.

    Names, labels and the initial state carry over unchanged.
    """
    if len(sched.choice) != m.num_states:
        raise ValueError("scheduler does not cover every state")
    actions = tuple((m.actions[s][sched.choice[s]],) for s in range(m.num_states))
    return Model(names=m.names, initial=m.initial, labels=m.labels, actions=actions)
