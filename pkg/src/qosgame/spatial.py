"""Interference graphs and spatial QoS satisfaction games.

A plain :class:`~qosgame.game.Game` is the spatial game on the complete
graph, and every function here that takes a spatial game also accepts a
plain one.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .game import Game, GameError


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected simple graph on vertices ``0..n_vertices-1``.

    Kept both as an edge set and as closed neighbourhoods since the
    potential needs the former and utilities the latter.
    """

    n_vertices: int
    edges: frozenset[tuple[int, int]]
    positions: Optional[tuple[tuple[float, float], ...]] = None
    neighbors: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_vertices < 1:
            raise GameError("graph needs at least one vertex")
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise GameError(f"self-loop at vertex {a}")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise GameError(f"edge ({a}, {b}) out of range")
            norm.add((min(a, b), max(a, b)))
        adj = [{v} for v in range(self.n_vertices)]
        for a, b in norm:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "neighbors", tuple(frozenset(s) for s in adj))
        if self.positions is not None:
            pos = tuple((float(p[0]), float(p[1])) for p in self.positions)
            if len(pos) != self.n_vertices:
                raise GameError("one position per vertex required")
            object.__setattr__(self, "positions", pos)

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Sequence[int]], positions=None):
        return cls(n_vertices, frozenset((int(a), int(b)) for a, b in edges), positions)

    @property
    def is_complete(self) -> bool:
        n = self.n_vertices
        return len(self.edges) == n * (n - 1) // 2

    def to_dict(self) -> dict:
        d = {"n_vertices": self.n_vertices, "edges": [list(e) for e in sorted(self.edges)]}
        if self.positions is not None:
            d["positions"] = [list(p) for p in self.positions]
        return d


def neighborhood(graph: InterferenceGraph, n: int) -> frozenset[int]:
    """Closed neighbourhood of ``n`` (contains ``n`` itself)."""
    return graph.neighbors[n]


@functools.lru_cache(maxsize=128)
def complete_graph(n: int) -> InterferenceGraph:
    return InterferenceGraph(n, frozenset(itertools.combinations(range(n), 2)))


def empty_graph(n: int) -> InterferenceGraph:
    return InterferenceGraph(n, frozenset())


def random_geometric_graph(n: int, width_m: float, height_m: float, range_m: float,
                           seed=None) -> InterferenceGraph:
    """Uniform points in a ``width x height`` box, linked when within ``range_m`` (inclusive)."""
    if width_m <= 0 or height_m <= 0 or range_m < 0:
        raise GameError("region dimensions must be positive and range non-negative")
    rng = np.random.default_rng(seed)
    pts = rng.uniform((0.0, 0.0), (width_m, height_m), size=(n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff ** 2).sum(axis=-1)
    ii, jj = np.nonzero(np.triu(d2 <= range_m * range_m, k=1))
    return InterferenceGraph(n, frozenset(zip(ii.tolist(), jj.tolist())),
                             positions=tuple(map(tuple, pts.tolist())))


def random_graph(n: int, p: float, seed=None) -> InterferenceGraph:
    """Erdos-Renyi G(n, p); used to fuzz the dynamics on arbitrary topologies."""
    rng = np.random.default_rng(seed)
    edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
    return InterferenceGraph(n, frozenset(edges))


@dataclass(frozen=True)
class SpatialGame:
    game: Game
    graph: InterferenceGraph

    def __post_init__(self):
        if self.graph.n_vertices != self.game.n_players:
            raise GameError(
                f"graph has {self.graph.n_vertices} vertices but game has {self.game.n_players} players")

    @property
    def n_players(self) -> int:
        return self.game.n_players

    @property
    def n_channels(self) -> int:
        return self.game.n_channels

    def to_dict(self) -> dict:
        d = self.game.to_dict()
        d["graph"] = self.graph.to_dict()
        return d


AnyGame = Union[Game, SpatialGame]


def as_spatial(game: AnyGame) -> SpatialGame:
    if isinstance(game, SpatialGame):
        return game
    return SpatialGame(game, complete_graph(game.n_players))


def local_congestion(sgame: AnyGame, profile: Sequence[int], n: int, c: int) -> int:
    """Number of players in ``n``'s closed neighbourhood using channel ``c``."""
    sg = as_spatial(sgame)
    return sum(1 for m in sg.graph.neighbors[n] if profile[m] == c)


def spatial_utility(sgame: AnyGame, profile: Sequence[int], n: int) -> int:
    sg = as_spatial(sgame)
    c = profile[n]
    if c == 0:
        return 0
    return 1 if local_congestion(sg, profile, n, c) <= sg.game.thresholds[n][c - 1] else -1


def spatial_utilities(sgame: AnyGame, profile: Sequence[int]) -> list[int]:
    sg = as_spatial(sgame)
    return [spatial_utility(sg, profile, n) for n in range(sg.n_players)]
