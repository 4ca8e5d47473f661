"""Better-response dynamics and the exact potential of spatial QoS games.

The potential is kept doubled (``2 * Phi``) so that every value is an
integer::

    2*Phi(x) = 2 * sum_{n active} T_n^{x_n}
               - 2 * #{same-channel edges}
               - #{active players}

Every better-response update raises ``2*Phi`` by at least 1, which bounds
any run by ``4N + 3N^2`` updates.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .game import Profile, check_profile
from .spatial import AnyGame, SpatialGame, as_spatial

ROUND_ROBIN = "round-robin"
RANDOM = "random"
LOWEST = "lowest"


class InvariantViolation(RuntimeError):
    """A proven property failed at run time; always an implementation bug."""


def update_bound(n_players: int) -> int:
    return 4 * n_players + 3 * n_players ** 2


def _move_utility(sg: SpatialGame, profile: Sequence[int], n: int, c: int) -> int:
    # utility of n after moving to c with everyone else fixed
    if c == 0:
        return 0
    others = sum(1 for m in sg.graph.neighbors[n] if m != n and profile[m] == c)
    return 1 if others + 1 <= sg.game.thresholds[n][c - 1] else -1


def _current_utility(sg: SpatialGame, profile: Sequence[int], n: int) -> int:
    return _move_utility(sg, profile, n, profile[n])


def better_responses(sgame: AnyGame, profile: Sequence[int], n: int) -> list[int]:
    """Strategies that strictly raise player ``n``'s utility."""
    sg = as_spatial(sgame)
    u = _current_utility(sg, profile, n)
    if u == 1:
        return []
    return [c for c in range(sg.n_channels + 1)
            if c != profile[n] and _move_utility(sg, profile, n, c) > u]


def best_response_set(sgame: AnyGame, profile: Sequence[int], n: int) -> list[int]:
    """Utility-maximising strategies, kept only if they improve on the current one."""
    sg = as_spatial(sgame)
    u = _current_utility(sg, profile, n)
    values = [_move_utility(sg, profile, n, c) for c in range(sg.n_channels + 1)]
    best = max(values)
    if best <= u:
        return []
    return [c for c, v in enumerate(values) if v == best]


def is_pure_nash(sgame: AnyGame, profile: Sequence[int]) -> bool:
    sg = as_spatial(sgame)
    return all(not better_responses(sg, profile, n) for n in range(sg.n_players))


def potential2(sgame: AnyGame, profile: Sequence[int]) -> int:
    """Twice the potential, as an exact integer."""
    sg = as_spatial(sgame)
    T = sg.game.thresholds
    thr = sum(T[n][c - 1] for n, c in enumerate(profile) if c != 0)
    mono = sum(1 for a, b in sg.graph.edges if profile[a] != 0 and profile[a] == profile[b])
    active = sum(1 for c in profile if c != 0)
    return 2 * thr - 2 * mono - active


def potential2_bounds(n_players: int) -> tuple[int, int]:
    """Range of ``2*Phi`` over all profiles with thresholds in ``[0, N+1]``.

    Both ends are attained: the lower with every player on one channel of a
    complete graph with zero thresholds, the upper with every player alone
    on a channel with threshold ``N+1``.
    """
    N = n_players
    return -N * N, N * (2 * N + 1)


@dataclass(frozen=True)
class UpdateEvent:
    step: int
    player: int
    from_: int
    to: int
    utility_before: int
    utility_after: int
    potential2_after: int


@dataclass
class Trace:
    initial_profile: Profile
    initial_potential2: int
    events: list[UpdateEvent] = field(default_factory=list)
    final_profile: Profile = ()
    converged: bool = False

    @property
    def potentials(self) -> list[int]:
        return [self.initial_potential2] + [e.potential2_after for e in self.events]

    FIELDS = ("step", "player", "from", "to", "utility_before", "utility_after", "potential2")

    def rows(self):
        for e in self.events:
            yield (e.step, e.player, e.from_, e.to, e.utility_before, e.utility_after,
                   e.potential2_after)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "initial_profile": list(self.initial_profile),
            "initial_potential2": self.initial_potential2,
            "final_profile": list(self.final_profile),
            "converged": self.converged,
            "events": [dict(zip(self.FIELDS, r)) for r in self.rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run_better_response(sgame: AnyGame, initial: Sequence[int], scheduler: str = RANDOM,
                        choice: str = RANDOM, seed=None, best_only: bool = True,
                        check: bool = True) -> Trace:
    """Asynchronous better-response process until a pure Nash equilibrium.

    ``scheduler`` picks the mover among players that can improve:
    ``"round-robin"`` cycles through players in index order, skipping those
    that cannot improve; ``"random"`` picks uniformly.  ``choice`` picks the
    new strategy: uniformly (``"random"``) or the smallest index
    (``"lowest"``).  With ``best_only=False`` the mover may pick any better
    response rather than a best one.

    With ``check`` on, each event asserts the potential rose by at least 1
    and the event count stays within ``4N + 3N^2``.
    """
    if scheduler not in (ROUND_ROBIN, RANDOM):
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if choice not in (RANDOM, LOWEST):
        raise ValueError(f"unknown choice rule {choice!r}")
    sg = as_spatial(sgame)
    x = list(check_profile(sg.game, initial))
    N = sg.n_players
    rng = np.random.default_rng(seed)
    responses = best_response_set if best_only else better_responses
    bound = update_bound(N)

    phi = potential2(sg, x)
    trace = Trace(initial_profile=tuple(x), initial_potential2=phi)
    cursor = 0
    while True:
        if scheduler == RANDOM:
            options = {n: responses(sg, x, n) for n in range(N)}
            movers = [n for n in range(N) if options[n]]
            if not movers:
                break
            n = movers[int(rng.integers(len(movers)))]
            opts = options[n]
        else:
            for k in range(N):
                n = (cursor + k) % N
                opts = responses(sg, x, n)
                if opts:
                    break
            else:
                break
            cursor = (n + 1) % N
        to = opts[0] if choice == LOWEST else opts[int(rng.integers(len(opts)))]
        u_before = _current_utility(sg, x, n)
        frm = x[n]
        x[n] = to
        u_after = _current_utility(sg, x, n)
        new_phi = potential2(sg, x)
        step = len(trace.events) + 1
        if check:
            if u_after <= u_before:
                raise InvariantViolation(f"step {step}: player {n} did not improve")
            if new_phi - phi < 1:
                raise InvariantViolation(f"step {step}: 2*Phi went {phi} -> {new_phi}")
            if step > bound:
                raise InvariantViolation(f"more than {bound} updates for N={N}")
        trace.events.append(UpdateEvent(step, n, frm, to, u_before, u_after, new_phi))
        phi = new_phi
    trace.final_profile = tuple(x)
    trace.converged = True
    return trace

