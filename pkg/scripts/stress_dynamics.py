#!/usr/bin/env python3
"""Run better-response dynamics on many random spatial games and report the
worst observed update count relative to ``4N + 3N^2``."""
import argparse

import numpy as np

from qosgame.dynamics import is_pure_nash, run_better_response, update_bound
from qosgame.game import Game
from qosgame.spatial import SpatialGame, random_graph


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--games", type=int, default=1000)
    p.add_argument("--max-players", type=int, default=15)
    p.add_argument("--max-channels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--any-better", action="store_true")
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    worst, total = 0.0, 0
    for _ in range(args.games):
        N = int(rng.integers(1, args.max_players + 1))
        C = int(rng.integers(1, args.max_channels + 1))
        T = rng.integers(0, N + 2, size=(N, C))
        sg = SpatialGame(Game.from_matrix(T),
                         random_graph(N, float(rng.uniform()), seed=int(rng.integers(2 ** 32))))
        x0 = rng.integers(0, C + 1, size=N).tolist()
        tr = run_better_response(sg, x0, scheduler=str(rng.choice(["round-robin", "random"])),
                                 seed=int(rng.integers(2 ** 32)), best_only=not args.any_better)
        assert is_pure_nash(sg, tr.final_profile)
        worst = max(worst, len(tr.events) / update_bound(N))
        total += len(tr.events)
    print(f"{args.games} games, {total} updates, worst updates/bound = {worst:.3f}")


if __name__ == "__main__":
    main()
