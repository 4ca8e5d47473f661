import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qosgame.dynamics import is_pure_nash
from qosgame.game import Game, GameError, congestion, is_natural, satisfied_count, welfare
from qosgame.solvers import (BudgetExceeded, PoaUndefined, PreconditionError, algorithm1,
                             algorithm1_steps, all_profile_flags, brute_force_optimum, ceil_div,
                             enumerate_pne, homogeneous_user_checks, optimum_subset_dp, poa_bound,
                             price_of_anarchy, profile_space_size, round_robin_profile,
                             round_robin_satisfies_all, scan)

from conftest import all_profiles, games

TEN = Game.homogeneous_channels([5, 5, 3, 3, 3, 3, 2, 2, 1, 1], 3)
SIX = Game.homogeneous_channels([2, 2, 4, 4, 4, 4], 2)


@st.composite
def homogeneous_channel_games(draw, max_players=8, max_channels=3):
    N = draw(st.integers(1, max_players))
    C = draw(st.integers(1, max_channels))
    T = draw(st.lists(st.integers(0, N + 1), min_size=N, max_size=N))
    return Game.homogeneous_channels(T, C)


def slow_optimum(game):
    best = None
    for x in all_profiles(game.n_players, game.n_channels):
        w = welfare(game, x)
        if best is None or w > best[0]:
            best = (w, x)
    return best


class TestAlgorithm1:
    def test_ten_player_golden(self):
        x = algorithm1(TEN)
        assert x == (1, 1, 1, 2, 2, 2, 3, 3, 0, 0)
        assert satisfied_count(TEN, x) == 8
        assert is_pure_nash(TEN, x)

    def test_ties_broken_by_index(self):
        g = Game.homogeneous_channels([1, 2, 1, 2], 1)
        # order 1, 3, 0, 2: players 1 and 3 fill the only channel
        assert algorithm1(g) == (0, 1, 0, 1)

    def test_heterogeneous_channels_rejected(self):
        with pytest.raises(PreconditionError):
            algorithm1(Game(((1, 2),)))

    def test_steps_start_dormant(self):
        steps = algorithm1_steps(TEN)
        assert steps[0] == (0,) * 10 and len(steps) == 11

    @settings(max_examples=200, deadline=None)
    @given(homogeneous_channel_games())
    def test_optimal_and_stable(self, g):
        x = algorithm1(g)
        assert welfare(g, x) == brute_force_optimum(g)[0]
        assert is_pure_nash(g, x)

    @settings(max_examples=200)
    @given(homogeneous_channel_games(max_players=12, max_channels=4))
    def test_dormant_set_is_the_unprocessed_tail(self, g):
        order = sorted(range(g.n_players), key=lambda n: -g.thresholds[n][0])
        steps = algorithm1_steps(g)
        placed = [steps[k + 1][n] != 0 for k, n in enumerate(order)]
        # once a player is left out, every later player is too
        assert placed == sorted(placed, reverse=True)
        for k in range(g.n_players + 1):
            if all(placed[:k]):
                dormant = {n for n in range(g.n_players) if steps[k][n] == 0}
                assert dormant == set(order[k:])

    @settings(max_examples=150, deadline=None)
    @given(homogeneous_channel_games(max_players=6, max_channels=3))
    def test_iteration_invariants(self, g):
        """Whenever the next player still fits somewhere, the profile before its
        move is natural, keeps the optimum reachable, has exactly the unprocessed
        players dormant, and has channels filled left to right."""
        order = sorted(range(g.n_players), key=lambda n: -g.thresholds[n][0])
        steps = algorithm1_steps(g)
        C = g.n_channels
        beta0 = reachable_best(g, steps[0])
        for k, n in enumerate(order):
            x, t = steps[k], g.thresholds[n][0]
            loads = [congestion(x, c) for c in range(1, C + 1)]
            fits = [c for c in range(1, C + 1) if loads[c - 1] < t]
            if not fits:
                continue
            assert is_natural(g, x)
            assert reachable_best(g, x) == beta0
            assert {m for m in range(g.n_players) if x[m] == 0} == set(order[k:])
            first = fits[0]
            for c in range(1, C + 1):
                if c < first:
                    assert loads[c - 1] >= t
                elif c > first:
                    assert loads[c - 1] == 0
            assert steps[k + 1][n] == first


def reachable_best(g, x):
    # most satisfied users over profiles that only activate dormant players of x
    dormant = [n for n in range(g.n_players) if x[n] == 0]
    best = 0
    for choice in itertools.product(range(g.n_channels + 1), repeat=len(dormant)):
        y = list(x)
        for n, c in zip(dormant, choice):
            y[n] = c
        best = max(best, satisfied_count(g, y))
    return best


class TestRoundRobin:
    @pytest.mark.parametrize("N,C,expected", [
        (6, 3, (2, 3, 1, 2, 3, 1)),
        (1, 5, (2,)),
        (4, 1, (1, 1, 1, 1)),
    ])
    def test_golden(self, N, C, expected):
        assert round_robin_profile(N, C) == expected

    def test_loads_balanced(self):
        x = round_robin_profile(17, 5)
        loads = [x.count(c) for c in range(1, 6)]
        assert max(loads) == ceil_div(17, 5) and min(loads) == 17 // 5

    def test_precondition(self):
        assert round_robin_satisfies_all(Game.homogeneous_channels([2, 2, 2], 2))
        assert not round_robin_satisfies_all(Game.homogeneous_channels([1, 2, 2], 2))
        assert not round_robin_satisfies_all(Game(((2, 3), (2, 3))))

    def test_bad_sizes(self):
        with pytest.raises(GameError):
            round_robin_profile(0, 2)


class TestExhaustive:
    @pytest.mark.parametrize("game,expected", [
        (SIX, 6),
        (Game.homogeneous_channels([2, 2, 3, 3, 3, 4], 2), 5),
        (Game(((0,), (0,))), 0),
        (TEN, 8),
    ])
    def test_optimum_golden(self, game, expected):
        assert brute_force_optimum(game)[0] == expected
        assert optimum_subset_dp(game)[0] == expected

    def test_all_zero_witness_is_dormant(self):
        assert brute_force_optimum(Game(((0, 0), (0, 0)))) == (0, (0, 0))

    def test_witness_is_lexicographically_first(self):
        g = Game.homogeneous_channels([1, 1], 2)
        assert brute_force_optimum(g) == (2, (1, 2))

    def test_pne_golden(self):
        assert enumerate_pne(Game.homogeneous_channels([1, 1], 1)) == [(0, 1), (1, 0)]
        assert enumerate_pne(Game(((1,),))) == [(1,)]

    def test_six_player_scan(self):
        s = scan(SIX)
        assert (s.optimum_welfare, s.worst_pne_welfare, s.best_pne_welfare, s.pne_count) == (6, 4, 6, 24)
        assert (0, 0, 1, 1, 2, 2) in enumerate_pne(SIX)

    def test_budget_refusal(self):
        g = Game.homogeneous_channels([1] * 12, 3)
        assert profile_space_size(g) == 4 ** 12
        with pytest.raises(BudgetExceeded):
            brute_force_optimum(g, budget=10 ** 6)
        with pytest.raises(BudgetExceeded):
            enumerate_pne(g, budget=10)

    def test_block_boundary(self):
        # more than one enumeration block
        g = Game.homogeneous_channels([3, 3, 2, 2, 2, 1, 1, 1, 1], 3)
        assert profile_space_size(g) > 1 << 16
        assert brute_force_optimum(g)[0] == algorithm1_welfare(g)

    @settings(max_examples=100, deadline=None)
    @given(games(max_players=5, max_channels=3))
    def test_vectorised_flags_match_scalar(self, g):
        X, w, natural, satisfied, pne = all_profile_flags(g)
        expected = list(all_profiles(g.n_players, g.n_channels))
        assert [tuple(r) for r in X.tolist()] == expected
        for i, x in enumerate(expected):
            assert w[i] == welfare(g, x)
            assert natural[i] == is_natural(g, x)
            assert satisfied[i] == satisfied_count(g, x)
            assert pne[i] == is_pure_nash(g, x)

    @settings(max_examples=150, deadline=None)
    @given(games(max_players=6, max_channels=3))
    def test_subset_dp_matches_enumeration(self, g):
        w, x = optimum_subset_dp(g)
        assert w == brute_force_optimum(g)[0] == slow_optimum(g)[0]
        assert welfare(g, x) == w

    @settings(max_examples=100, deadline=None)
    @given(games(max_players=6, max_channels=3))
    def test_equilibria_exist_and_are_natural(self, g):
        pne = enumerate_pne(g)
        assert pne
        for x in pne:
            assert is_natural(g, x)
            assert welfare(g, x) == satisfied_count(g, x)


def algorithm1_welfare(g):
    return welfare(g, algorithm1(g))


class TestPoa:
    def test_six_player(self):
        r = price_of_anarchy(SIX)
        assert r.poa == Fraction(3, 2) and r.bound == 2
        doc = json.loads(json.dumps(r.to_dict()))
        assert doc["poa"] == [3, 2] and doc["poa_float"] == 1.5

    def test_two_players_one_channel(self):
        r = price_of_anarchy(Game.homogeneous_channels([1, 1], 1))
        assert (r.optimum_welfare, r.worst_pne_welfare, r.poa, r.bound) == (1, 1, 1, 1)

    def test_homogeneous_users_give_one(self):
        g = Game.homogeneous_users([1, 2], 4)
        assert price_of_anarchy(g).poa == 1

    def test_undefined(self):
        with pytest.raises(PoaUndefined):
            price_of_anarchy(Game(((0,), (0,))))

    def test_bound_values(self):
        assert poa_bound(Game(((1, 4), (2, 2)))) == 2
        assert poa_bound(Game(((1, 3), (3, 3), (3, 3)))) == 3
        assert poa_bound(Game(((2, 3), (3, 3), (3, 3)))) == Fraction(3, 2)
        assert poa_bound(Game(((0, 3), (3, 3)))) == 2

    @settings(max_examples=100, deadline=None)
    @given(games(max_players=6, max_channels=3, min_threshold=1))
    def test_bound_holds(self, g):
        r = price_of_anarchy(g)
        assert 1 <= r.poa <= r.bound


class TestHomogeneousUsers:
    G = Game.homogeneous_users([1, 2], 3)

    @pytest.mark.parametrize("x,expected", [
        ((1, 2, 2), (True, True, True)),
        ((0, 0, 0), (False, False, False)),
        ((1, 1, 2), (False, False, False)),
        ((0, 1, 2), (False, False, False)),
    ])
    def test_examples(self, x, expected):
        assert homogeneous_user_checks(self.G, x) == expected

    def test_excess_players(self):
        g = Game.homogeneous_users([1, 1], 3)
        assert homogeneous_user_checks(g, (1, 2, 0)) == (True, True, True)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            homogeneous_user_checks(Game(((1,), (2,))), (0, 0))
