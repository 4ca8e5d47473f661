"""Command line front end.

Exit codes: 0 success, 2 invalid input or unmet precondition, 3 budget
refusal, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import io as docs
from .dynamics import InvariantViolation, is_pure_nash, run_better_response
from .game import Game, GameError, is_natural, satisfied_count, welfare
from .hardness import brute_force_3dm, decide_matching_via_game, reduce_3dm, target_welfare
from .simkit import ScenarioConfig, SimulationError, replicate
from .solvers import (DEFAULT_BUDGET, BudgetExceeded, PoaUndefined, PreconditionError,
                      algorithm1, brute_force_optimum, ceil_div, price_of_anarchy,
                      profile_space_size, round_robin_profile, round_robin_satisfies_all)
from .spatial import SpatialGame

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4


class Output:
    """Collects files written by one command and records the run manifest."""

    def __init__(self, out_dir, subcommand: str, config_path: str, seeds: dict):
        self.dir = Path(out_dir) if out_dir else None
        self.info = {
            "tool": "qosgame",
            "version": __version__,
            "subcommand": subcommand,
            "config_path": str(config_path),
            "seeds": seeds,
        }
        self.files: list[str] = []
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir is None:
            return
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.files.append(name)

    def write_json(self, name: str, doc: dict) -> None:
        # manifest without timestamp so that outputs stay reproducible
        self.write(name, docs.dumps({**doc, "manifest": self.info}))

    def close(self) -> None:
        if self.dir is None:
            return
        manifest = {**self.info, "outputs": self.files,
                    "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        (self.dir / "manifest.json").write_text(docs.dumps(manifest))


def _load_game(path):
    return docs.game_from_dict(docs.read_json(path))


def _plain(game) -> Game:
    if isinstance(game, SpatialGame):
        if not game.graph.is_complete:
            raise PreconditionError("centralized solvers need the non-spatial game (complete graph)")
        return game.game
    return game


def _emit(text: str) -> None:
    sys.stdout.write(text)


def cmd_solve(args) -> int:
    game = _plain(_load_game(args.game))
    if args.algorithm == "alg1":
        profile = algorithm1(game)
    elif args.algorithm == "round-robin":
        if not round_robin_satisfies_all(game):
            need = ceil_div(game.n_players, game.n_channels)
            raise PreconditionError(
                "round-robin guarantee needs homogeneous channels with every threshold "
                f">= ceil(N/C) = {need}")
        profile = round_robin_profile(game.n_players, game.n_channels)
    else:
        _, profile = brute_force_optimum(game, budget=args.budget)
    report = {
        "algorithm": args.algorithm,
        "profile": list(profile),
        "welfare": welfare(game, profile),
        "satisfied_count": satisfied_count(game, profile),
        "natural": is_natural(game, profile),
        "pure_nash": is_pure_nash(game, profile),
    }
    out = Output(args.out, "solve", args.game, {})
    out.write("profile.json", json.dumps(list(profile)) + "\n")
    out.write_json("solve.json", report)
    out.close()
    _emit(f"profile {list(profile)}  welfare {report['welfare']}  "
          f"satisfied {report['satisfied_count']}  pure_nash {report['pure_nash']}\n")
    if args.out is None:
        _emit(docs.dumps(report))
    return EXIT_OK


def _initial_profile(spec: str, game, seed):
    N, C = game.n_players, game.n_channels
    if spec == "dormant":
        return (0,) * N
    if spec == "random":
        rng = np.random.default_rng([seed, 1])
        return tuple(int(v) for v in rng.integers(0, C + 1, size=N))
    path = Path(spec)
    value = docs.read_json(path) if path.exists() else json.loads(spec)
    return docs.profile_from_json(value, game.game if isinstance(game, SpatialGame) else game)


def cmd_dynamics(args) -> int:
    game = _load_game(args.game)
    try:
        initial = _initial_profile(args.initial, game, args.seed)
    except json.JSONDecodeError as exc:
        raise docs.DocumentError(f"--initial: not a profile, file, 'dormant' or 'random' ({exc})")
    trace = run_better_response(game, initial, scheduler=args.scheduler, choice=args.choice,
                                seed=args.seed, best_only=not args.any_better)
    out = Output(args.out, "dynamics", args.game,
                 {"seed": args.seed, "scheduler": args.scheduler, "choice": args.choice})
    out.write("trace.csv", trace.to_csv())
    out.write_json("trace.json", trace.to_dict())
    out.close()
    _emit(f"{len(trace.events)} updates, final {list(trace.final_profile)}, "
          f"2*Phi {trace.initial_potential2} -> {trace.potentials[-1]}\n")
    if args.out is None:
        _emit(trace.to_csv())
    return EXIT_OK


def cmd_analyze(args) -> int:
    game = _plain(_load_game(args.game))
    report = price_of_anarchy(game, budget=args.budget).to_dict()
    out = Output(args.out, "analyze", args.game, {})
    out.write_json("poa.json", report)
    out.close()
    _emit(docs.dumps(report))
    return EXIT_OK


def cmd_reduce_3dm(args) -> int:
    instance = docs.instance_from_dict(docs.read_json(args.instance))
    game = reduce_3dm(instance)
    doc = {
        "I": instance.size,
        "J": instance.n_triples,
        "n_players": game.n_players,
        "n_channels": game.n_channels,
        "target_welfare": target_welfare(instance),
    }
    matching = decide_matching_via_game(instance)
    doc["matching_via_game"] = matching
    doc["matching_brute_force"] = brute_force_3dm(instance)
    if profile_space_size(game) <= args.budget:
        doc["matching_via_exhaustive_game"] = decide_matching_via_game(
            instance, lambda g: brute_force_optimum(g, args.budget))
    doc["oracles_agree"] = len({v for k, v in doc.items() if k.startswith("matching")}) == 1
    out = Output(args.out, "reduce-3dm", args.instance, {})
    out.write("game.json", docs.dumps(docs.game_to_dict(game)))
    out.write_json("decision.json", doc)
    out.close()
    _emit(docs.dumps(doc))
    if not doc["oracles_agree"]:
        raise InvariantViolation("reduction decision disagrees with the matching oracle")
    return EXIT_OK


SWEEP_HEADER = ["value", "n_reps", "mean_satisfied", "min_satisfied", "max_satisfied",
                "mean_convergence_slots", "mean_updates"]


def load_scenario(path):
    doc = docs.read_json(path)
    docs.require_version(doc, "scenario")
    doc = dict(doc)
    doc.pop("schema_version")
    sweep = doc.pop("sweep", None)
    try:
        config = ScenarioConfig.from_dict(doc)
    except TypeError as exc:
        raise docs.DocumentError(f"scenario: {exc}") from exc
    if sweep is not None:
        if not isinstance(sweep, dict) or set(sweep) != {"field", "values"}:
            raise docs.DocumentError("scenario.sweep: expected {'field': ..., 'values': [...]}")
        if sweep["field"] not in config.to_dict():
            raise docs.DocumentError(f"scenario.sweep.field: unknown field {sweep['field']!r}")
    return config, sweep


def cmd_simulate(args) -> int:
    config, sweep = load_scenario(args.scenario)
    overrides = {k: v for k, v in (("topology_seed", args.topology_seed),
                                   ("dynamics_seed", args.dynamics_seed)) if v is not None}
    config = replace(config, **overrides)
    seeds = {"topology_seed": config.topology_seed, "dynamics_seed": config.dynamics_seed}
    out = Output(args.out, "simulate", args.scenario, seeds)
    points = [(None, config)] if sweep is None else [
        (v, replace(config, **{sweep["field"]: v})) for v in sweep["values"]]
    table = io.StringIO()
    writer = csv.writer(table, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    aggregate = []
    for value, cfg in points:
        summary, results = replicate(cfg, args.reps, workers=args.workers)
        prefix = "" if value is None else f"{sweep['field']}={value}/"
        for rep, res in enumerate(results):
            out.write(f"{prefix}rep_{rep:03d}.csv", res.to_csv())
        aggregate.append({
            "value": value,
            "config": cfg.to_dict(),
            "summary": summary.to_dict(),
            "runs": [r.summary() for r in results],
        })
        writer.writerow(["" if value is None else value, summary.n_reps, summary.mean_satisfied,
                         summary.min_satisfied, summary.max_satisfied,
                         summary.mean_convergence_slots, summary.mean_updates])
        _emit(f"{prefix or 'scenario '}mean satisfied {summary.mean_satisfied:.2f}, "
              f"mean slots {summary.mean_convergence_slots:.2f}\n")
    out.write("sweep.csv", table.getvalue())
    doc = {"sweep_field": None if sweep is None else sweep["field"], "points": aggregate}
    out.write_json("summary.json", doc)
    out.close()
    if args.out is None:
        _emit(table.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qosgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qosgame {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="centralized profile for a game file")
    s.add_argument("game")
    s.add_argument("--algorithm", choices=["alg1", "round-robin", "brute-force"], default="alg1")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("dynamics", help="better-response run with potential trace")
    d.add_argument("game")
    d.add_argument("--initial", default="dormant",
                   help="'dormant', 'random', a JSON array, or a profile file")
    d.add_argument("--scheduler", choices=["round-robin", "random"], default="random")
    d.add_argument("--choice", choices=["random", "lowest"], default="random")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--any-better", action="store_true",
                   help="move to any better response instead of a best one")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dynamics)

    a = sub.add_parser("analyze", help="exact price of anarchy")
    a.add_argument("game")
    a.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reduce-3dm", help="encode a 3DM instance as a game and decide it")
    r.add_argument("instance")
    r.add_argument("--budget", type=int, default=10 ** 6)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce_3dm)

    m = sub.add_parser("simulate", help="replicated protocol simulation")
    m.add_argument("scenario")
    m.add_argument("--reps", type=int, default=20)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--topology-seed", type=int)
    m.add_argument("--dynamics-seed", type=int)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvariantViolation, SimulationError) as exc:
        print(f"error: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (PoaUndefined, GameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
