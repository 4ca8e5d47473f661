import json
from pathlib import Path

import pytest

from qosgame.cli import main

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def small_scenario(tmp_path, **extra):
    doc = {"schema_version": 1, "n_users": 6, "topology_seed": 1, "dynamics_seed": 2, **extra}
    return write(tmp_path, "scenario.json", doc)


class TestSolve:
    def test_alg1(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["solve", str(DATA / "greedy_ten_players.json"), "--out", str(out)]) == 0
        assert json.loads((out / "profile.json").read_text()) == [1, 1, 1, 2, 2, 2, 3, 3, 0, 0]
        report = json.loads((out / "solve.json").read_text())
        assert report["welfare"] == 8 and report["pure_nash"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "solve" and "timestamp" in manifest
        assert set(manifest["outputs"]) == {"profile.json", "solve.json"}

    def test_brute_force(self, capsys):
        assert main(["solve", str(DATA / "six_players_two_channels.json"),
                     "--algorithm", "brute-force"]) == 0
        assert '"welfare": 6' in capsys.readouterr().out

    def test_round_robin_precondition(self, capsys):
        # T = 1 < ceil(10 / 3) for some players
        assert main(["solve", str(DATA / "greedy_ten_players.json"), "--algorithm", "round-robin"]) == 2
        assert "ceil(N/C)" in capsys.readouterr().err

    def test_round_robin(self, tmp_path):
        g = write(tmp_path, "g.json", {"schema_version": 1, "n_players": 4, "n_channels": 2,
                                       "thresholds": [[2, 2]] * 4})
        assert main(["solve", g, "--algorithm", "round-robin"]) == 0

    def test_budget_refusal(self, tmp_path, capsys):
        assert main(["solve", str(DATA / "greedy_ten_players.json"), "--algorithm", "brute-force",
                     "--budget", "1000"]) == 3
        assert "budget" in capsys.readouterr().err

    def test_missing_version(self, tmp_path, capsys):
        g = write(tmp_path, "g.json", {"n_players": 1, "n_channels": 1, "thresholds": [[1]]})
        assert main(["solve", g]) == 2
        assert "schema_version" in capsys.readouterr().err

    def test_wrong_version(self, tmp_path):
        g = write(tmp_path, "g.json", {"schema_version": 2, "n_players": 1, "n_channels": 1,
                                       "thresholds": [[1]]})
        assert main(["solve", g]) == 2

    def test_shape_mismatch(self, tmp_path):
        g = write(tmp_path, "g.json", {"schema_version": 1, "n_players": 2, "n_channels": 1,
                                       "thresholds": [[1]]})
        assert main(["solve", g]) == 2

    def test_spatial_game_rejected(self, tmp_path):
        g = write(tmp_path, "g.json", {"schema_version": 1, "n_players": 2, "n_channels": 1,
                                       "thresholds": [[1], [1]],
                                       "graph": {"n_vertices": 2, "edges": []}})
        assert main(["solve", g]) == 2

    def test_missing_file(self):
        assert main(["solve", "/nonexistent/game.json"]) == 2


class TestDynamics:
    def test_trace_files(self, tmp_path):
        out = tmp_path / "d"
        assert main(["dynamics", str(DATA / "two_players_one_channel.json"), "--initial", "[1, 1]",
                     "--scheduler", "round-robin", "--choice", "lowest", "--out", str(out)]) == 0
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "step,player,from,to,utility_before,utility_after,potential2"
        assert lines[1:] == ["1,0,1,0,-1,0,1"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"]["scheduler"] == "round-robin"

    def test_spatial_game(self, tmp_path):
        g = write(tmp_path, "g.json", {"schema_version": 1, "n_players": 3, "n_channels": 1,
                                       "thresholds": [[1], [1], [1]],
                                       "graph": {"n_vertices": 3, "edges": [[0, 1], [1, 2]]}})
        assert main(["dynamics", g, "--initial", "random", "--seed", "4"]) == 0

    def test_initial_from_file(self, tmp_path):
        p = write(tmp_path, "x.json", [0, 2])
        g = write(tmp_path, "g.json", {"schema_version": 1, "n_players": 2, "n_channels": 2,
                                       "thresholds": [[1, 1], [1, 1]]})
        assert main(["dynamics", g, "--initial", p]) == 0

    @pytest.mark.parametrize("initial", ["[1]", "[5, 0]", "nonsense"])
    def test_bad_initial(self, initial, capsys):
        assert main(["dynamics", str(DATA / "two_players_one_channel.json"), "--initial", initial]) == 2


class TestAnalyze:
    def test_poa(self, tmp_path, capsys):
        assert main(["analyze", str(DATA / "six_players_two_channels.json"),
                     "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "poa.json").read_text())
        assert doc["poa"] == [3, 2] and doc["worst_pne_welfare"] == 4 and doc["pne_count"] == 24

    def test_undefined(self, capsys):
        assert main(["analyze", str(DATA / "zero_row.json")]) == 2
        assert "undefined" in capsys.readouterr().err


class TestReduce:
    @pytest.mark.parametrize("name,matching", [("3dm_single.json", True),
                                               ("3dm_shared_x.json", False),
                                               ("3dm_disjoint.json", True)])
    def test_files(self, name, matching, tmp_path):
        assert main(["reduce-3dm", str(DATA / name), "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "decision.json").read_text())
        assert doc["matching_via_game"] is matching and doc["oracles_agree"]
        game = json.loads((tmp_path / "game.json").read_text())
        assert game["n_players"] == 2 * doc["I"] + doc["J"]

    def test_bad_instance(self, tmp_path):
        p = write(tmp_path, "i.json", {"schema_version": 1, "I": 2, "triples": [[1, 1, 9], [2, 2, 2]]})
        assert main(["reduce-3dm", p]) == 2

    def test_too_many_triples(self, tmp_path):
        triples = [[a, b, c] for a in (1, 2, 3) for b in (1, 2, 3) for c in (1, 2, 3)][:21]
        p = write(tmp_path, "i.json", {"schema_version": 1, "I": 3, "triples": triples})
        assert main(["reduce-3dm", p]) == 3


class TestSimulate:
    def test_outputs(self, tmp_path):
        out = tmp_path / "s"
        assert main(["simulate", small_scenario(tmp_path), "--reps", "2", "--out", str(out)]) == 0
        assert (out / "rep_000.csv").exists() and (out / "rep_001.csv").exists()
        assert (out / "sweep.csv").read_text().startswith("value,n_reps,mean_satisfied")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == {"topology_seed": 1, "dynamics_seed": 2}

    def test_seed_override(self, tmp_path):
        out = tmp_path / "s"
        assert main(["simulate", small_scenario(tmp_path), "--reps", "1", "--topology-seed", "9",
                     "--out", str(out)]) == 0
        assert json.loads((out / "manifest.json").read_text())["seeds"]["topology_seed"] == 9

    def test_sweep(self, tmp_path):
        sc = small_scenario(tmp_path, sweep={"field": "high_fraction", "values": [0.0, 1.0]})
        out = tmp_path / "s"
        assert main(["simulate", sc, "--reps", "2", "--out", str(out)]) == 0
        assert (out / "high_fraction=1.0" / "rep_001.csv").exists()
        assert len((out / "sweep.csv").read_text().splitlines()) == 3

    @pytest.mark.parametrize("extra", [{"n_users": -1}, {"speed": 3},
                                       {"sweep": {"field": "nope", "values": [1]}}])
    def test_invalid_scenario(self, tmp_path, extra, capsys):
        assert main(["simulate", small_scenario(tmp_path, **extra), "--reps", "1"]) == 2

    def test_slot_limit_is_invariant_failure(self, tmp_path):
        assert main(["simulate", small_scenario(tmp_path, max_slots=1), "--reps", "1"]) == 4


class TestDeterminism:
    def collect(self, out):
        return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*"))
                if p.is_file() and p.name != "manifest.json"}

    def test_simulate_byte_identical(self, tmp_path):
        sc = small_scenario(tmp_path, sweep={"field": "high_fraction", "values": [0.2, 0.8]})
        for run in ("a", "b"):
            assert main(["simulate", sc, "--reps", "3", "--out", str(tmp_path / run)]) == 0
        a, b = self.collect(tmp_path / "a"), self.collect(tmp_path / "b")
        assert a == b and any(str(k).endswith(".csv") for k in a)

    def test_dynamics_byte_identical(self, tmp_path):
        game = str(DATA / "six_players_two_channels.json")
        for run in ("a", "b"):
            assert main(["dynamics", game, "--initial", "random", "--seed", "7",
                         "--out", str(tmp_path / run)]) == 0
        assert self.collect(tmp_path / "a") == self.collect(tmp_path / "b")
