import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from netsampler.cli import main, parse_graphon
from netsampler.grnn import random_weights, save_weights


@pytest.fixture
def runner():
    return CliRunner()


class TestParsing:
    def test_graphon_shorthand(self):
        assert parse_graphon("constant:0.5") == {"kind": "constant", "params": {"p": 0.5}}
        spec = parse_graphon("ws-limit:0.2:0.3")
        assert spec["params"] == {"radius": 0.2, "beta": 0.3}

    def test_graphon_json_passthrough(self):
        raw = '{"kind": "constant", "params": {"p": 0.25}}'
        assert parse_graphon(raw)["params"]["p"] == 0.25


class TestRunEval:
    def test_run_writes_outputs(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--graph", "watts_strogatz", "--m", "8", "--steps", "16",
            "--policy", "uniform", "--seed", "5", "--slots", "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "episodes.csv").exists()
        assert (tmp_path / "slots.csv").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["m"] == 8

    def test_eval_deterministic_bytes(self, runner, tmp_path):
        args = [
            "eval", "--graph", "watts_strogatz", "--m", "8", "--steps", "16",
            "--episodes", "3", "--policy", "age", "--seed", "9",
        ]
        r1 = runner.invoke(main, args + ["--out", str(tmp_path / "a")])
        r2 = runner.invoke(main, args + ["--out", str(tmp_path / "b")])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert (tmp_path / "a/episodes.csv").read_bytes() == (tmp_path / "b/episodes.csv").read_bytes()

    def test_config_file_with_flag_override(self, runner, tmp_path):
        cfg = {
            "graph": {"kind": "watts_strogatz", "m": 8},
            "steps": 16,
            "policy": "uniform",
            "graph_seed": 1, "noise_seed": 1, "policy_seed": 1,
        }
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        result = runner.invoke(main, [
            "run", "--config", str(cfg_path), "--policy", "silence", "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "o/summary.json").read_text())
        assert summary["collision_rate"] == 0.0  # silence never collides

    def test_toml_config(self, runner, tmp_path):
        cfg_path = tmp_path / "run.toml"
        cfg_path.write_text(
            'steps = 8\npolicy = "uniform"\ngraph_seed = 2\nnoise_seed = 2\npolicy_seed = 2\n'
            '[graph]\nkind = "watts_strogatz"\nm = 8\n'
        )
        result = runner.invoke(main, ["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 0, result.output


class TestGrnnAndSweep:
    def test_grnn_run_with_weight_file(self, runner, tmp_path):
        wpath = tmp_path / "w.json"
        wpath.write_bytes(save_weights(random_weights(seed=3)))
        result = runner.invoke(main, [
            "run", "--graph", "watts_strogatz", "--m", "8", "--steps", "8",
            "--policy", "grnn", "--weights", str(wpath), "--seed", "4",
            "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code == 0, result.output

    def test_transfer_sweep(self, runner, tmp_path):
        wpath = tmp_path / "w.json"
        wpath.write_bytes(save_weights(random_weights(seed=3)))
        result = runner.invoke(main, [
            "transfer-sweep", "--graph", "watts_strogatz", "--m-list", "10,12",
            "--episodes", "2", "--steps", "16", "--weights", str(wpath), "--seed", "4",
            "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "o/sweep.csv").read_text().splitlines()
        assert len(lines) == 7  # header + 2 sizes x 3 policies


class TestTransferLab:
    def test_writes_both_reports(self, runner, tmp_path):
        result = runner.invoke(main, [
            "transfer-lab", "--m-list", "8", "--n", "128", "--seeds", "2",
            "--recurrence", "1", "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "theorem1.csv").exists()
        assert (tmp_path / "theorem2.csv").exists()
        assert "0 bound violations" in result.output


class TestServeStdio:
    def test_stdio_round_trip(self):
        msgs = (
            json.dumps({"type": "reset", "seed": 1, "graph": {"m": 2, "edges": [[0, 1]]}, "steps": 1})
            + "\n"
            + json.dumps({"type": "act", "decisions": [[0, 0], [1, 1]]})
            + "\n"
        )
        proc = subprocess.run(
            [sys.executable, "-m", "netsampler.cli", "serve", "--stdio"],
            input=msgs.encode(),
            capture_output=True,
            timeout=60,
        )
        lines = proc.stdout.decode().splitlines()
        assert json.loads(lines[0])["type"] == "obs"
        reply = json.loads(lines[1])
        assert reply["type"] == "transition"
        assert reply["done"] is True
