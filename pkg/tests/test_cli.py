import json

import pandas as pd
import pytest

from services.cli_setu.main import cli_main


@pytest.fixture
def network_file(tmp_path):
    path = tmp_path / "net.json"
    assert cli_main(["gen", "-N", "8", "--seed", "3", "-o", str(path)]) == 0
    return path


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_assign_verify(network_file, tmp_path, capsys):
    out = tmp_path / "a.json"
    assert cli_main(["assign", str(network_file), "--algo", "near-optimal", "-o", str(out)]) == 0
    report = _json_out(capsys)
    assert report["algo"] == "near-optimal"
    assert report["delivered"] is True
    assert report["iterations"] is None

    assert cli_main(["verify", str(network_file), str(out)]) == 0
    verdict = _json_out(capsys)
    assert verdict["delivered"] is True
    assert verdict["reached"] == verdict["n_nodes"] == 8
    assert verdict["cost"] == pytest.approx(report["cost"])


def test_assign_to_stdout_and_planner_ordering(network_file, capsys):
    costs = {}
    for algo in ("bip", "bip-sweep", "optimal"):
        assert cli_main(["assign", str(network_file), "--algo", algo]) == 0
        payload = _json_out(capsys)
        assert len(payload["assignment"]["ranges"]) == 8
        costs[algo] = payload["report"]["cost"]
    assert costs["optimal"] <= costs["bip-sweep"] <= costs["bip"]


def test_verify_reports_an_undelivered_assignment(network_file, tmp_path, capsys):
    silent = tmp_path / "zeros.json"
    silent.write_text(json.dumps({"alpha": 2.0, "ranges": [0.0] * 8}), encoding="utf-8")
    assert cli_main(["verify", str(network_file), str(silent)]) == 0
    verdict = _json_out(capsys)
    assert verdict["delivered"] is False
    assert verdict["reached"] == 1
    assert verdict["rounds"] == 0


@pytest.mark.parametrize("argv", [
    ["verify", "missing.json", "missing.json"],
    ["assign"],
    ["assign", "net.json", "--algo", "spt"],
    ["gen", "-N", "1"],
])
def test_input_errors_exit_one(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert cli_main(argv) == 1
    assert "Error" in capsys.readouterr().err


def test_size_mismatch_is_an_input_error(network_file, tmp_path, capsys):
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"alpha": 2.0, "ranges": [1.0, 0.0]}), encoding="utf-8")
    assert cli_main(["verify", str(network_file), str(short)]) == 1


def test_budget_exhaustion_and_resume(network_file, tmp_path, capsys):
    checkpoint = tmp_path / "ck.json"
    code = cli_main(["assign", str(network_file), "--algo", "optimal", "--budget", "5",
                     "--checkpoint", str(checkpoint)])
    assert code == 2
    assert "BudgetExceeded: " in capsys.readouterr().err
    assert json.loads(checkpoint.read_text(encoding="utf-8"))["next_t"] == 0

    assert cli_main(["assign", str(network_file), "--algo", "optimal", "--resume", str(checkpoint)]) == 0
    resumed = _json_out(capsys)
    assert cli_main(["assign", str(network_file), "--algo", "optimal"]) == 0
    assert _json_out(capsys)["report"]["cost"] == resumed["report"]["cost"]


def test_budget_from_environment(network_file, monkeypatch, capsys):
    monkeypatch.setenv("CROSSBCAST_BUDGET", "5")
    assert cli_main(["assign", str(network_file), "--algo", "optimal"]) == 2
    # a flag still wins over the environment
    assert cli_main(["assign", str(network_file), "--algo", "optimal", "--budget", "10000000000"]) == 0


def test_bad_environment_is_a_config_error(network_file, monkeypatch, capsys):
    monkeypatch.setenv("CROSSBCAST_WORKERS", "many")
    assert cli_main(["assign", str(network_file), "--algo", "bip"]) == 1
    assert "ConfigError: " in capsys.readouterr().err


def test_grid_commands(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    assert cli_main(["grid-gen", "-k", "2", "-N", "12", "--seed", "4", "-o", str(grid)]) == 0
    assert cli_main(["assign", str(grid), "--algo", "distributed"]) == 0
    assert _json_out(capsys)["report"]["delivered"] is True
    assert cli_main(["assign", str(grid), "--algo", "near-optimal"]) == 1
    assert "UnknownPlanner" in capsys.readouterr().err
    assert cli_main(["grid-gen", "-k", "2", "-N", "4"]) == 1


def test_mc_writes_csv(tmp_path):
    csv = tmp_path / "mc.csv"
    code = cli_main(["mc", "-N", "8,10", "--trials", "3", "--algos", "bip,distributed",
                     "--denominator", "bip-sweep", "--seed", "9", "--csv", str(csv)])
    assert code == 0
    frame = pd.read_csv(csv)
    assert len(frame) == 4
    assert set(frame["N"]) == {8, 10}
    assert set(frame["denominator"]) == {"bip-sweep"}


def test_mc_preset_and_config_file(tmp_path):
    csv = tmp_path / "preset.csv"
    assert cli_main(["mc", "--preset", "table-general", "-N", "6", "--trials", "2", "--csv", str(csv)]) == 0
    frame = pd.read_csv(csv)
    assert list(frame["algo"]) == ["near-optimal", "bip-sweep", "bip", "distributed"]
    assert (frame["mean_ratio"] >= 1.0 - 1e-9).all()

    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"topology": "square-grid", "N": [10], "trials": 2, "grid_k": 1}), encoding="utf-8")
    csv = tmp_path / "grid.csv"
    out = tmp_path / "grid.json"
    assert cli_main(["mc", "--config", str(config), "--csv", str(csv), "--json", str(out)]) == 0
    assert set(pd.read_csv(csv)["topology"]) == {"square-grid-1"}
    assert json.loads(out.read_text(encoding="utf-8"))["partial"] is False

    config.write_text(json.dumps({"trials": 0}), encoding="utf-8")
    assert cli_main(["mc", "--config", str(config)]) == 1


def test_mc_partial_exits_two(tmp_path, capsys):
    csv = tmp_path / "partial.csv"
    code = cli_main(["mc", "-N", "6", "--trials", "2", "--algos", "bip", "--denominator", "optimal",
                     "--budget", "1", "--csv", str(csv)])
    assert code == 2
    assert "partial" in capsys.readouterr().err
    assert csv.exists()


def test_props(tmp_path):
    out = tmp_path / "props.json"
    assert cli_main(["props", "--samples", "100", "--instances", "3", "--json", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["total_violations"] == 0


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert "assign" in capsys.readouterr().out
