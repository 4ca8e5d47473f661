"""JSON documents read and written by the command line tool.

Every input document carries ``schema_version``.  Shapes::

    game      {"schema_version": 1, "n_players": N, "n_channels": C,
               "thresholds": [[...], ...], "graph": {...}?}
    graph     {"n_vertices": N, "edges": [[a, b], ...], "positions": [[x, y], ...]?}
    profile   [x_0, ..., x_{N-1}]
    instance  {"schema_version": 1, "I": I, "triples": [[x, y, z], ...]}
    scenario  {"schema_version": 1, <ScenarioConfig fields>, "sweep": {...}?}
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .game import Game, GameError, check_profile
from .hardness import ThreeDMInstance
from .spatial import InterferenceGraph, SpatialGame

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """Malformed or incompatible input document."""


def require_version(doc: dict, what: str) -> None:
    if not isinstance(doc, dict):
        raise DocumentError(f"{what}: expected a JSON object")
    v = doc.get("schema_version")
    if v is None:
        raise DocumentError(f"{what}: missing required field 'schema_version'")
    if v != SCHEMA_VERSION:
        raise DocumentError(f"{what}: unsupported schema_version {v!r} (expected {SCHEMA_VERSION})")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def read_json(path: Union[str, Path]):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from exc


def graph_from_dict(d: dict) -> InterferenceGraph:
    try:
        return InterferenceGraph.from_edges(int(d["n_vertices"]), d["edges"], d.get("positions"))
    except KeyError as exc:
        raise DocumentError(f"graph: missing field {exc}") from exc


def game_from_dict(doc: dict) -> Union[Game, SpatialGame]:
    require_version(doc, "game")
    try:
        game = Game(tuple(tuple(int(t) for t in row) for row in doc["thresholds"]))
        n, c = int(doc["n_players"]), int(doc["n_channels"])
    except KeyError as exc:
        raise DocumentError(f"game: missing field {exc}") from exc
    except (TypeError, GameError) as exc:
        raise DocumentError(f"game: {exc}") from exc
    if (n, c) != (game.n_players, game.n_channels):
        raise DocumentError(
            f"game: n_players/n_channels = {n}/{c} but thresholds are {game.n_players}x{game.n_channels}")
    if doc.get("graph") is not None:
        try:
            return SpatialGame(game, graph_from_dict(doc["graph"]))
        except GameError as exc:
            raise DocumentError(f"game.graph: {exc}") from exc
    return game


def game_to_dict(game: Union[Game, SpatialGame]) -> dict:
    return {"schema_version": SCHEMA_VERSION, **game.to_dict()}


def profile_from_json(value, game: Game) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise DocumentError("profile: expected an integer array")
    try:
        return check_profile(game, value)
    except GameError as exc:
        raise DocumentError(f"profile: {exc}") from exc


def instance_from_dict(doc: dict) -> ThreeDMInstance:
    require_version(doc, "instance")
    try:
        return ThreeDMInstance.from_dict(doc)
    except KeyError as exc:
        raise DocumentError(f"instance: missing field {exc}") from exc
    except GameError as exc:
        raise DocumentError(f"instance: {exc}") from exc


def instance_to_dict(instance: ThreeDMInstance) -> dict:
    return {"schema_version": SCHEMA_VERSION, **instance.to_dict()}
