"""Centralized algorithms and exact oracles for (non-spatial) QoS games.

The exhaustive oracles walk all ``(C+1)^N`` profiles in lexicographic
order, in vectorised blocks, and refuse outright when the space exceeds the
budget.  They never fall back to sampling.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .dynamics import is_pure_nash
from .game import Game, GameError, Profile, check_profile, utilities

DEFAULT_BUDGET = 10 ** 8
_BLOCK = 1 << 16


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"profile space of size {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


class PreconditionError(GameError):
    """An algorithm was called on a game outside its hypothesis."""


class PoaUndefined(ArithmeticError):
    """Worst equilibrium has welfare 0, so the ratio is a division by zero."""


def profile_space_size(game: Game) -> int:
    return (game.n_channels + 1) ** game.n_players


def _check_budget(game: Game, budget: int) -> int:
    size = profile_space_size(game)
    if size > budget:
        raise BudgetExceeded(size, budget)
    return size


def _profile_blocks(n_players: int, n_channels: int, block: int = _BLOCK) -> Iterator[np.ndarray]:
    # mixed radix with player 0 most significant -> lexicographic order
    base = n_channels + 1
    total = base ** n_players
    weights = base ** np.arange(n_players - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        yield ((idx[:, None] // weights[None, :]) % base).astype(np.int16)


def _evaluate(T: np.ndarray, X: np.ndarray):
    """Welfare, naturalness and equilibrium flags for a block of profiles."""
    K, N = X.shape
    C = T.shape[1]
    counts = np.zeros((K, C + 1), dtype=np.int16)
    for c in range(1, C + 1):
        counts[:, c] = (X == c).sum(axis=1)
    own = np.take_along_axis(counts, X.astype(np.intp), axis=1)
    T_pad = np.concatenate([np.zeros((N, 1), dtype=T.dtype), T], axis=1)
    own_T = T_pad[np.arange(N)[None, :], X]
    active = X != 0
    sat = active & (own <= own_T)
    suffering = active & ~sat
    welfare = sat.sum(axis=1) - suffering.sum(axis=1)
    natural = ~suffering.any(axis=1)
    # a dormant player improves iff some channel c has I^c < T_n^c
    can_join = (counts[:, None, 1:] < T[None, :, :]).any(axis=2)
    pne = natural & ~((~active) & can_join).any(axis=1)
    return welfare, natural, sat.sum(axis=1), pne


@dataclass(frozen=True)
class Scan:
    optimum_welfare: int
    optimum_witness: Profile
    worst_pne_welfare: int
    best_pne_welfare: int
    pne_count: int


def scan(game: Game, budget: int = DEFAULT_BUDGET) -> Scan:
    """One exhaustive pass collecting optimum and equilibrium statistics."""
    _check_budget(game, budget)
    T = game.matrix
    opt, witness = None, None
    worst, best, count = None, None, 0
    for X in _profile_blocks(game.n_players, game.n_channels):
        w, _, _, pne = _evaluate(T, X)
        i = int(np.argmax(w))
        if opt is None or w[i] > opt:
            opt, witness = int(w[i]), tuple(int(s) for s in X[i])
        if pne.any():
            wp = w[pne]
            worst = int(wp.min()) if worst is None else min(worst, int(wp.min()))
            best = int(wp.max()) if best is None else max(best, int(wp.max()))
            count += int(pne.sum())
    return Scan(opt, witness, worst, best, count)


def brute_force_optimum(game: Game, budget: int = DEFAULT_BUDGET) -> tuple[int, Profile]:
    """Maximum welfare and the lexicographically smallest profile attaining it."""
    s = scan(game, budget)
    return s.optimum_welfare, s.optimum_witness


def enumerate_pne(game: Game, budget: int = DEFAULT_BUDGET) -> list[Profile]:
    """All pure Nash equilibria in lexicographic order."""
    _check_budget(game, budget)
    T = game.matrix
    out: list[Profile] = []
    for X in _profile_blocks(game.n_players, game.n_channels):
        pne = _evaluate(T, X)[3]
        out.extend(tuple(int(s) for s in row) for row in X[pne])
    return out


def all_profile_flags(game: Game, budget: int = DEFAULT_BUDGET):
    """Arrays over every profile: profiles, welfare, natural, satisfied, pne."""
    _check_budget(game, budget)
    parts = [(X,) + _evaluate(game.matrix, X)
             for X in _profile_blocks(game.n_players, game.n_channels)]
    return tuple(np.concatenate(p) for p in zip(*parts))


def optimum_subset_dp(game: Game) -> tuple[int, Profile]:
    """Exact optimum by dynamic programming over subsets of players.

    Some optimum is natural, so its welfare is the size of the largest
    player set that can be split into channel groups where every member
    tolerates the group size.  Cost is ``O(C * F * 2^N)`` with ``F`` the
    number of feasible groups per channel.
    """
    N, C = game.n_players, game.n_channels
    if N > 20:
        raise BudgetExceeded(2 ** N, 2 ** 20)
    T = game.matrix
    full = 1 << N
    masks = np.arange(full, dtype=np.int64)
    popcount = np.zeros(full, dtype=np.int64)
    for n in range(N):
        popcount += (masks >> n) & 1
    reach = np.zeros(full, dtype=bool)
    reach[0] = True
    parents = []
    for c in range(C):
        # group S is feasible on c iff |S| <= T_n^c for all n in S
        min_t = np.full(full, N + 1, dtype=np.int64)
        for n in range(N):
            has = ((masks >> n) & 1).astype(bool)
            min_t[has] = np.minimum(min_t[has], T[n, c])
        groups = masks[(popcount <= min_t) & (masks != 0)]
        new = reach.copy()
        parent = np.full(full, -1, dtype=np.int64)
        src = masks[reach]
        for S in groups.tolist():
            ok = src[(src & S) == 0]
            dst = ok | S
            fresh = ~new[dst]
            new[dst[fresh]] = True
            parent[dst[fresh]] = S
        parents.append(parent)
        reach = new
    best_mask = int(masks[reach][np.argmax(popcount[reach])])
    profile = [0] * N
    mask = best_mask
    for c in range(C - 1, -1, -1):
        S = int(parents[c][mask])
        if S < 0:
            continue
        for n in range(N):
            if S >> n & 1:
                profile[n] = c + 1
        mask ^= S
    return int(popcount[best_mask]), tuple(profile)


def _sorted_order(game: Game) -> list[int]:
    if not game.has_homogeneous_channels:
        raise PreconditionError("greedy construction needs homogeneous channels (T_n^c equal across c)")
    Tn = [row[0] for row in game.thresholds]
    return sorted(range(game.n_players), key=lambda n: -Tn[n])


def algorithm1_steps(game: Game) -> list[Profile]:
    """Profiles ``x^0, ..., x^N`` produced by the greedy equilibrium construction.

    Players are processed by descending threshold (stable in index); each
    joins the lowest channel whose congestion is below its threshold, if any.
    Profiles are reported in the original player order.
    """
    order = _sorted_order(game)
    C = game.n_channels
    x = [0] * game.n_players
    load = [0] * (C + 1)
    steps = [tuple(x)]
    for n in order:
        t = game.thresholds[n][0]
        free = [c for c in range(1, C + 1) if load[c] < t]
        if free:
            c = free[0]
            x[n] = c
            load[c] += 1
        steps.append(tuple(x))
    return steps


def algorithm1(game: Game) -> Profile:
    """A social optimum that is also a pure Nash equilibrium (homogeneous channels)."""
    return algorithm1_steps(game)[-1]


def round_robin_profile(n_players: int, n_channels: int) -> Profile:
    """Player ``n`` (1-based) on channel ``1 + (n mod C)``."""
    if n_players < 1 or n_channels < 1:
        raise GameError("need N >= 1 and C >= 1")
    return tuple(1 + (n % n_channels) for n in range(1, n_players + 1))


@dataclass(frozen=True)
class PoaReport:
    optimum_welfare: int
    worst_pne_welfare: int
    best_pne_welfare: int
    poa: Fraction
    bound: Fraction
    pne_count: int

    def to_dict(self) -> dict:
        return {
            "optimum_welfare": self.optimum_welfare,
            "worst_pne_welfare": self.worst_pne_welfare,
            "best_pne_welfare": self.best_pne_welfare,
            "poa": [self.poa.numerator, self.poa.denominator],
            "poa_float": float(self.poa),
            "bound": [self.bound.numerator, self.bound.denominator],
            "bound_float": float(self.bound),
            "pne_count": self.pne_count,
        }


def poa_bound(game: Game) -> Fraction:
    """``min{N, Tmax/Tmin}``; a zero minimum threshold leaves just ``N``."""
    T = game.matrix
    tmin, tmax = int(T.min()), int(T.max())
    N = Fraction(game.n_players)
    if tmin == 0:
        return N
    return min(N, Fraction(tmax, tmin))


def price_of_anarchy(game: Game, budget: int = DEFAULT_BUDGET) -> PoaReport:
    s = scan(game, budget)
    if s.pne_count == 0:
        raise AssertionError("a QoS game without pure equilibria contradicts the potential argument")
    if s.worst_pne_welfare <= 0:
        raise PoaUndefined("PoA undefined: worst pure equilibrium has welfare "
                           f"{s.worst_pne_welfare} (needs every T_n^c >= 1)")
    return PoaReport(
        optimum_welfare=s.optimum_welfare,
        worst_pne_welfare=s.worst_pne_welfare,
        best_pne_welfare=s.best_pne_welfare,
        poa=Fraction(s.optimum_welfare, s.worst_pne_welfare),
        bound=poa_bound(game),
        pne_count=s.pne_count,
    )


def homogeneous_user_checks(game: Game, profile: Sequence[int],
                    optimum: Optional[int] = None) -> tuple[bool, bool, bool]:
    """(is PNE, natural with ``min{N, sum T^c}`` satisfied, is optimum) for homogeneous users."""
    if not game.has_homogeneous_users:
        raise PreconditionError("homogeneous users required (T_n^c equal across n)")
    x = check_profile(game, profile)
    if optimum is None:
        optimum = optimum_subset_dp(game)[0]
    u = utilities(game, x)
    target = min(game.n_players, sum(game.thresholds[0]))
    canonical = -1 not in u and u.count(1) == target
    return is_pure_nash(game, x), canonical, sum(u) == optimum


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def round_robin_satisfies_all(game: Game) -> bool:
    need = ceil_div(game.n_players, game.n_channels)
    return game.has_homogeneous_channels and all(r[0] >= need for r in game.thresholds)

