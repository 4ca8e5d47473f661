import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from qosgame.game import Game
from qosgame.spatial import InterferenceGraph, SpatialGame


@st.composite
def games(draw, max_players=5, max_channels=3, min_threshold=0):
    N = draw(st.integers(1, max_players))
    C = draw(st.integers(1, max_channels))
    rows = draw(st.lists(
        st.lists(st.integers(min_threshold, N + 1), min_size=C, max_size=C),
        min_size=N, max_size=N))
    return Game(tuple(tuple(r) for r in rows))


@st.composite
def spatial_games(draw, max_players=6, max_channels=3):
    game = draw(games(max_players, max_channels))
    pairs = list(itertools.combinations(range(game.n_players), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = frozenset(p for p, keep in zip(pairs, mask) if keep)
    return SpatialGame(game, InterferenceGraph(game.n_players, edges))


@st.composite
def game_and_profile(draw, game_strategy=None):
    game = draw(games() if game_strategy is None else game_strategy)
    g = game.game if isinstance(game, SpatialGame) else game
    x = tuple(draw(st.lists(st.integers(0, g.n_channels), min_size=g.n_players,
                            max_size=g.n_players)))
    return game, x


def all_profiles(n_players, n_channels):
    return itertools.product(range(n_channels + 1), repeat=n_players)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
