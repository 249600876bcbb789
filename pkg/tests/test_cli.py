import json

import pytest
from click.testing import CliRunner

from crashnet import network
from crashnet.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _generate(runner, path, n=2, m=4, seed=3):
    result = runner.invoke(
        main, ["generate", "-n", str(n), "-m", str(m), "--seed", str(seed),
               "-o", str(path)]
    )
    assert result.exit_code == 0, result.output
    return path


def test_generate_writes_valid_network(runner, tmp_path):
    path = _generate(runner, tmp_path / "net.json")
    net = network.load_network(path)
    assert network.validate(net) == []
    assert net.n_institutions == 2 and net.n_assets == 4


def test_equilibrium_command(runner, tmp_path):
    path = _generate(runner, tmp_path / "net.json")
    out = tmp_path / "eq.json"
    result = runner.invoke(
        main, ["equilibrium", "--network", str(path), "-o", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "institution 0" in result.output
    doc = json.loads(out.read_text())
    assert len(doc["market_values"]) == 2


def test_hubo_reduce_solve_chain(runner, tmp_path):
    net = _generate(runner, tmp_path / "net.json")
    poly = tmp_path / "poly.txt"
    result = runner.invoke(
        main, ["hubo", "--network", str(net), "--bits", "3", "-r", "3",
               "-o", str(poly)]
    )
    assert result.exit_code == 0, result.output
    assert "6 variables" in result.output

    qubo = tmp_path / "prob.qubo"
    result = runner.invoke(
        main, ["reduce", "--hubo", str(poly), "-o", str(qubo)]
    )
    assert result.exit_code == 0, result.output
    assert "6 logical" in result.output

    samples = tmp_path / "samples.json"
    result = runner.invoke(
        main, ["solve", "--qubo", str(qubo), "--solver", "tabu", "--seed", "1",
               "-o", str(samples)]
    )
    assert result.exit_code == 0, result.output
    assert "best energy" in result.output
    doc = json.loads(samples.read_text())
    assert doc["samples"]


def test_estimate_command(runner):
    result = runner.invoke(main, ["estimate", "-n", "3", "--bits", "5", "-r", "3"])
    assert result.exit_code == 0
    assert "9949" in result.output


def test_pipeline_command_writes_artifacts(runner, tmp_path):
    out_dir = tmp_path / "run"
    result = runner.invoke(
        main, ["pipeline", "-n", "2", "-m", "4", "--net-seed", "3",
               "--bits", "3", "--zero-assets", "1", "--reads", "3",
               "--normalize", "--out-dir", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    report = json.loads((out_dir / "report.json").read_text())
    assert report["oracle"]["objective_gap"] >= -1e-9
    csv_lines = (out_dir / "per_institution.csv").read_text().splitlines()
    assert csv_lines[0].startswith("institution,")
    assert len(csv_lines) == 3  # header + one row per institution


def test_pipeline_flag_conflicts_exit_2(runner, tmp_path):
    net = _generate(runner, tmp_path / "net.json")
    result = runner.invoke(
        main, ["pipeline", "--network", str(net), "-n", "2"]
    )
    assert result.exit_code == 2
    assert "conflicts" in result.output


def test_pipeline_aggregates_flag_problems(runner):
    result = runner.invoke(
        main, ["pipeline", "--zero-assets", "1,x", "--zero-count", "2"]
    )
    assert result.exit_code == 2
    # every problem reported at once
    assert "give --network" in result.output
    assert "cannot parse" in result.output


def test_invalid_network_file_exits_2(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    result = runner.invoke(main, ["equilibrium", "--network", str(path)])
    assert result.exit_code == 2
    assert "error (validation)" in result.output


def test_solve_remote_requires_endpoint(runner, tmp_path):
    net = _generate(runner, tmp_path / "net.json")
    poly = tmp_path / "poly.txt"
    runner.invoke(main, ["hubo", "--network", str(net), "--bits", "2",
                         "-o", str(poly)])
    qubo = tmp_path / "prob.qubo"
    runner.invoke(main, ["reduce", "--hubo", str(poly), "-o", str(qubo)])
    result = runner.invoke(
        main, ["solve", "--qubo", str(qubo), "--solver", "remote"],
        env={"CRASHNET_SAMPLER_ENDPOINT": ""},
    )
    assert result.exit_code == 2
    assert "sampler-endpoint" in result.output


def test_remote_solver_unreachable_exits_5(runner, tmp_path):
    net = _generate(runner, tmp_path / "net.json")
    poly = tmp_path / "poly.txt"
    runner.invoke(main, ["hubo", "--network", str(net), "--bits", "2",
                         "-o", str(poly)])
    qubo = tmp_path / "prob.qubo"
    runner.invoke(main, ["reduce", "--hubo", str(poly), "-o", str(qubo)])
    result = runner.invoke(
        main, ["solve", "--qubo", str(qubo), "--solver", "remote",
               "--sampler-endpoint", "http://127.0.0.1:9"],
    )
    assert result.exit_code == 5
    assert "error (remote)" in result.output
