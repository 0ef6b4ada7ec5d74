import csv
import json

import numpy as np
import pytest

from noisyvqe.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline()
        rows = list(csv.DictReader(fh))
    return header, rows


FAST = {"restarts": 1, "max_iterations": 120, "tolerance": 1e-6, "patience": 5}


def test_missing_config_file_is_config_error(tmp_path, capsys):
    assert main(["meanfield", "--config", str(tmp_path / "absent.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["meanfield", "--config", str(path)]) == 2


def test_missing_seed_is_config_error(tmp_path):
    config = write_config(tmp_path, "c.json", {"models": ["tfim"]})
    assert main(["meanfield", "--config", config]) == 2


def test_unknown_model_is_config_error(tmp_path):
    config = write_config(
        tmp_path, "c.json", {"seed": 1, "models": ["ising"], "sizes": [2]}
    )
    assert main(["meanfield", "--config", config]) == 2


def test_unknown_noise_family_is_config_error(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        {"seed": 1, "model": "tfim", "n": 2, "depths": [1],
         "probabilities": [0.0], "families": ["thermal"]},
    )
    assert main(["noise-sweep", "--config", config]) == 2


def test_meanfield_command_writes_csv_and_sidecar(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        {"seed": 3, "models": ["tfim", "heisenberg"], "sizes": [2], "restarts": 5},
    )
    out = tmp_path / "mf.csv"
    assert main(["meanfield", "--config", config, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header.startswith("# config_hash=")
    assert "seed=3" in header
    assert len(rows) == 2
    by_model = {row["model"]: row for row in rows}
    assert float(by_model["tfim"]["E_mf"]) == pytest.approx(-2.0, abs=1e-4)
    assert float(by_model["heisenberg"]["E_mf"]) == pytest.approx(-1.0, abs=1e-4)
    meta = json.loads((tmp_path / "mf.csv.meta.json").read_text())
    assert meta["seed"] == 3
    assert meta["rows"] == 2
    assert meta["config"]["models"] == ["tfim", "heisenberg"]
    assert meta["wall_clock_seconds"] >= 0


def test_seed_override_takes_precedence(tmp_path):
    config = write_config(
        tmp_path, "c.json", {"seed": 3, "models": ["tfim"], "sizes": [2]}
    )
    out = tmp_path / "mf.csv"
    assert main(
        ["meanfield", "--config", config, "--seed", "9", "--out", str(out)]
    ) == 0
    header, _ = read_csv(out)
    assert "seed=9" in header


def test_depth_table_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        dict(FAST, seed=1, models=["tfim"], sizes=[2], max_depth=2,
             max_iterations=300),
    )
    out = tmp_path / "table.csv"
    assert main(["depth-table", "--config", config, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0]["model"] == "tfim"
    assert rows[0]["min_depth"] == "1"
    assert rows[0]["reached"] == "True"


def test_noise_sweep_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        dict(FAST, seed=2, model="tfim", n=2, depths=[1],
             probabilities=[0.0, 0.02], families=["depolarizing"]),
    )
    out = tmp_path / "sweep.csv"
    assert main(
        ["noise-sweep", "--config", config, "--out", str(out), "--workers", "2"]
    ) == 0
    _, rows = read_csv(out)
    assert len(rows) == 2
    assert {row["p"] for row in rows} == {"0.0", "0.02"}
    for row in rows:
        assert float(row["E"]) >= float(row["E0"]) - 1e-9


def test_ibm_compare_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        dict(FAST, seed=4, max_iterations=300,
             rows=[{"model": "tfim", "device": "Valencia[0,1]", "depth": 1}]),
    )
    out = tmp_path / "ibm.csv"
    assert main(["ibm-compare", "--config", config, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 1
    assert float(rows[0]["rel_deviation"]) < 0.12
    bad = write_config(
        tmp_path, "bad.json",
        dict(FAST, seed=4, rows=[{"model": "tfim", "device": "atlantis[0,1]"}]),
    )
    assert main(["ibm-compare", "--config", bad]) == 2


def test_accumulation_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        dict(FAST, seed=5, model="tfim", n=2, p=0.01, depths=[1, 2],
             max_iterations=200, compare_families=["damping"]),
    )
    out = tmp_path / "accum.csv"
    assert main(["accumulation", "--config", config, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    kinds = [row["kind"] for row in rows]
    assert kinds.count("depolarizing_accumulation") == 2
    assert kinds.count("damping_check") == 2


def test_crossover_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        dict(FAST, seed=6, max_iterations=250,
             cells=[{"model": "tfim", "n": 2, "depth": 1}],
             probabilities=[0.0, 0.02, 0.04, 0.06], mf_restarts=5),
    )
    out = tmp_path / "cross.csv"
    assert main(["crossover", "--config", config, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 1
    row = rows[0]
    assert float(row["E_mf"]) == pytest.approx(-2.0, abs=1e-3)
    if row["crossed"] == "True":
        assert 0.0 < float(row["p_star"]) < 1.0


def test_sampled_vqe_command(tmp_path):
    config = write_config(
        tmp_path, "c.json",
        {"seed": 7, "model": "tfim", "n": 2, "depth": 1, "shots": 256,
         "iterations": 3, "learning_rate": 0.1,
         "confusion": {"p0_to_1": [0.02, 0.02], "p1_to_0": [0.02, 0.02]}},
    )
    out = tmp_path / "sampled.csv"
    assert main(["sampled-vqe", "--config", config, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert [row["iteration"] for row in rows] == ["0", "1", "2"]
    assert all(np.isfinite(float(row["E"])) for row in rows)


def test_identical_configs_share_hash(tmp_path):
    payload = {"seed": 3, "models": ["tfim"], "sizes": [2]}
    config_a = write_config(tmp_path, "a.json", payload)
    config_b = write_config(tmp_path, "b.json", payload)
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["meanfield", "--config", config_a, "--out", str(out_a)]) == 0
    assert main(["meanfield", "--config", config_b, "--out", str(out_b)]) == 0
    header_a, rows_a = read_csv(out_a)
    header_b, rows_b = read_csv(out_b)
    assert header_a == header_b
    assert rows_a == rows_b
