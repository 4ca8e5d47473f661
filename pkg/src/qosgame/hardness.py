"""Encoding 3-dimensional matching as a social-optimum problem.

Each triple becomes a channel and each element of X, Y, Z a player; an
element has threshold 3 on the channels of triples containing it and 1
elsewhere.  ``J - I`` padding players have threshold 1 everywhere.  A
perfect matching exists iff all ``2I + J`` players can be satisfied at
once.

Player order: X elements ``1..I`` are players ``0..I-1``, then Y, then Z,
then padding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .game import Game, GameError
from .solvers import BudgetExceeded, optimum_subset_dp

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class ThreeDMInstance:
    size: int
    triples: tuple[Triple, ...]

    def __post_init__(self):
        if self.size < 1:
            raise GameError("3DM instance needs I >= 1")
        triples = tuple(tuple(int(v) for v in t) for t in self.triples)
        for t in triples:
            if len(t) != 3 or not all(1 <= v <= self.size for v in t):
                raise GameError(f"triple {t} not in [1, {self.size}]^3")
        if len(set(triples)) != len(triples):
            raise GameError("duplicate triple")
        if len(triples) < self.size:
            raise GameError(f"need J >= I, got J={len(triples)}, I={self.size}")
        object.__setattr__(self, "triples", triples)

    @property
    def n_triples(self) -> int:
        return len(self.triples)

    def to_dict(self) -> dict:
        return {"I": self.size, "triples": [list(t) for t in self.triples]}

    @classmethod
    def from_dict(cls, d: dict) -> "ThreeDMInstance":
        return cls(int(d["I"]), tuple(tuple(t) for t in d["triples"]))


def reduce_3dm(instance: ThreeDMInstance) -> Game:
    I, J = instance.size, instance.n_triples
    rows = []
    for axis in range(3):
        for element in range(1, I + 1):
            rows.append(tuple(3 if t[axis] == element else 1 for t in instance.triples))
    rows.extend((1,) * J for _ in range(J - I))
    return Game(tuple(rows))


def target_welfare(instance: ThreeDMInstance) -> int:
    return 2 * instance.size + instance.n_triples


def decide_matching_via_game(instance: ThreeDMInstance,
                             optimum_oracle: Optional[Callable[[Game], tuple]] = None) -> bool:
    """Perfect matching exists iff the reduced game's optimum satisfies everyone.

    ``optimum_oracle`` maps a game to ``(welfare, profile)``; the subset DP
    is used by default since the reduced games quickly outgrow exhaustive
    enumeration.
    """
    oracle = optimum_oracle or optimum_subset_dp
    welfare, _ = oracle(reduce_3dm(instance))
    return welfare == target_welfare(instance)


def brute_force_3dm(instance: ThreeDMInstance, max_triples: int = 20) -> bool:
    """Search every I-subset of triples for one that is coordinate-disjoint."""
    if instance.n_triples > max_triples:
        raise BudgetExceeded(instance.n_triples, max_triples)
    for combo in itertools.combinations(instance.triples, instance.size):
        if all(len({t[axis] for t in combo}) == instance.size for axis in range(3)):
            return True
    return False


def random_instance(size: int, n_triples: int, seed=None,
                    matchable: Optional[bool] = None) -> ThreeDMInstance:
    """Random instance with ``J`` distinct triples.

    ``matchable=True`` plants a perfect matching; ``False`` leaves one X
    element uncovered so no matching can exist; ``None`` draws triples
    uniformly.
    """
    I, J = size, n_triples
    rng = np.random.default_rng(seed)
    pool = list(itertools.product(range(1, I + 1), repeat=3))
    if matchable is False:
        if I == 1:
            raise GameError("every I=1 instance is matchable")
        missing = int(rng.integers(1, I + 1))
        pool = [t for t in pool if t[0] != missing]
    if J < I or J > len(pool):
        raise GameError(f"cannot draw {J} distinct triples for I={I}")
    chosen: list[Triple] = []
    if matchable:
        ys, zs = rng.permutation(I) + 1, rng.permutation(I) + 1
        chosen = [(x, int(ys[x - 1]), int(zs[x - 1])) for x in range(1, I + 1)]
    rest = [t for t in pool if t not in set(chosen)]
    picks = rng.choice(len(rest), size=J - len(chosen), replace=False)
    chosen += [rest[i] for i in sorted(picks.tolist())]
    order = rng.permutation(len(chosen))
    return ThreeDMInstance(I, tuple(chosen[i] for i in order))
