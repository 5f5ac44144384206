import subprocess
import sys

import pytest

from oimp.harness.cli import cli_main
from oimp.harness.io import read_records

SMALL = {
    "extract": ["extract", "--nodes", "300", "--K", "5"],
    "run": ["run", "--K", "4", "--N", "12", "--runs", "2"],
    "run-ic": ["run", "--env", "ic", "--nodes", "300", "--K", "4", "--N", "8", "--policy", "oracle",
               "--mc-samples", "20"],
    "run-lt": ["run", "--env", "lt", "--nodes", "300", "--K", "4", "--N", "8", "--policy", "max-degree",
               "--extract", "max-cover"],
    "run-replay": ["run", "--env", "replay", "--K", "4", "--N", "10", "--gamma", "inv",
                   "--policy", "fat-gt-ucb"],
    "waiting-time": ["waiting-time", "--runs", "2"],
    "estimator-study": ["estimator-study", "--runs", "2", "--N", "3"],
    "fatigue-study": ["fatigue-study", "--K", "4", "--N", "10", "--runs", "2"],
}


def run(argv, capsys):
    code = cli_main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(SMALL))
def test_subcommands_are_deterministic(name, capsys):
    code, first, _ = run(SMALL[name], capsys)
    assert code == 0 and first
    assert run(SMALL[name], capsys)[1] == first
    assert run(SMALL[name] + ["--seed", "5"], capsys)[1] != first or name == "run-ic"


def test_run_csv_columns(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert run(SMALL["run"] + ["--out", str(out)], capsys)[0] == 0
    recs = read_records(out)
    assert len(recs) == 24 and recs[0].policy == "gt-ucb"


def test_unknown_policy_names_valid_options(tmp_path, capsys):
    (tmp_path / "c.cfg").write_text("policy = greedy\n")
    code, _, err = run(["--config", str(tmp_path / "c.cfg"), "run", "--K", "2", "--N", "2"], capsys)
    assert code != 0 and "gt-ucb" in err
    code, _, err = run(["run", "--policy", "greedy"], capsys)
    assert code != 0 and "gt-ucb" in err


def test_config_file_and_cli_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("K = 3\nN = 5\nrun-twice = yes\nruns = 1\n")
    code, out, _ = run(["--config", str(cfg), "run"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 6
    code, out, _ = run(["--config", str(cfg), "run", "--N", "7"], capsys)
    assert len(out.strip().splitlines()) == 8


def test_config_boolean_flag(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("oracle-ignores-fatigue = false\nK = 2\nN = 3\npolicy = oracle\n")
    assert run(["--config", str(cfg), "run"], capsys)[0] == 0


def test_errors_are_reported(tmp_path, capsys):
    code, _, err = run(["run", "--K", "4", "--L", "5", "--N", "3"], capsys)
    assert code != 0 and "L" in err
    code, _, err = run(["extract", "--graph", str(tmp_path / "missing.txt")], capsys)
    assert code != 0 and "error" in err
    (tmp_path / "bad.txt").write_text("0 1\nbroken line here\n")
    code, _, err = run(["extract", "--graph", str(tmp_path / "bad.txt")], capsys)
    assert code != 0 and ":2:" in err
    code, _, err = run(["run", "--env", "replay", "--policy", "oracle", "--K", "4"], capsys)
    assert code != 0 and "oracle" in err
    assert run([], capsys)[0] != 0


def test_extract_from_file(tmp_path, capsys):
    (tmp_path / "g.txt").write_text("0 1\n0 2\n0 3\n4 0\n")
    code, out, _ = run(["extract", "--graph", str(tmp_path / "g.txt"), "--K", "1",
                        "--method", "max-degree"], capsys)
    assert code == 0 and out == "0\n"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oimp", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "oimp" in res.stdout
