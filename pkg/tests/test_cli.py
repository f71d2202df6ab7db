import csv
import json
import subprocess
import sys

import pytest

from hausdorff_bounds.cli import csv_text, emit_csv, main, parse_theorem, run_experiment, theorem_to_json
from hausdorff_bounds.errors import ConfigError, IoError

OPERATOR = {"m": 1, "n": 1, "kernel": {"kind": "closed", "expr": "1", "convention": "hardy_cesaro_psi"},
            "families": [{"kind": "diag_scalar", "expr": "t"}]}
C12 = {"theorem_id": "C3.1.2", "operator": OPERATOR, "q_i": [2], "lam_i": [-0.25], "q": 2, "lam": -0.25}


def config(command, payload=None, batch=None, **extra):
    out = {"v": 1, "command": command}
    if batch is not None:
        out["batch"] = batch
    else:
        out["payload"] = payload
    out.update(extra)
    return out


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_constant_record():
    (rec,) = run_experiment(config("constant", C12))
    assert rec["id"] == "C1.2"
    assert rec["value"] == pytest.approx(4 / 3, rel=1e-12)


def test_empty_batch_gives_header_only(tmp_path):
    records = run_experiment(config("constant", batch=[]))
    assert records == []
    out = tmp_path / "o.csv"
    emit_csv(records, out)
    assert out.read_text().splitlines() == ["command,id,value,error,verdict,seed,elapsed_ms,inputs_json"]


def test_missing_field_names_it():
    bad = dict(C12)
    del bad["q"]
    with pytest.raises(ConfigError) as info:
        run_experiment(config("constant", bad))
    assert info.value.field == "q"


def test_schema_version_required():
    with pytest.raises(ConfigError):
        run_experiment({"command": "constant", "payload": C12})


def test_one_record_two_lines_and_batch_of_three(tmp_path):
    out = tmp_path / "one.csv"
    emit_csv(run_experiment(config("constant", C12)), out)
    assert len(out.read_text().splitlines()) == 2
    out3 = tmp_path / "three.csv"
    emit_csv(run_experiment(config("verify", batch=[{"params": C12}] * 3)), out3)
    lines = out3.read_text().splitlines()
    assert len(lines) == 4
    assert all(",ExactMatch," in line for line in lines[1:])


def test_unwritable_path(tmp_path):
    with pytest.raises(IoError):
        emit_csv([], tmp_path / "missing-dir" / "o.csv")


def test_determinism_and_round_trip():
    cfg = config("sweep", {"params": {**C12, "theorem_id": "C3.2.2", "alpha_i": [0], "alpha": 0, "p_i": [2],
                                      "p": 2}, "eps": [0.1, 0.05]}, quad={"rel_tol": 1e-9})
    a = csv_text(run_experiment(cfg, seed=3))
    b = csv_text(run_experiment(cfg, seed=3))
    assert a == b
    rows = list(csv.DictReader(a.splitlines()))
    assert [r["seed"] for r in rows] == ["3", "3"]
    assert json.loads(rows[0]["inputs_json"]) == cfg["payload"]
    assert float(rows[1]["value"]) > float(rows[0]["value"])


def test_values_use_17_digits():
    text = csv_text(run_experiment(config("constant", C12)))
    assert "1.3333333333333333" in text


def test_theorem_json_round_trip():
    params = parse_theorem(C12)
    assert parse_theorem(theorem_to_json(params)) == params


def test_other_commands():
    norm = run_experiment(config("norm", {"space": {"kind": "herz", "q": 2, "p": 2, "alpha": 0},
                                          "f": {"kind": "indicator", "shape": "annulus", "r0": 0.5, "r1": 1}}))
    assert norm[0]["value"] == pytest.approx(1.0)
    app = run_experiment(config("apply", {"operator": OPERATOR, "functions": [{"kind": "power", "a": -0.25}],
                                          "x": [3.0]}))
    assert app[0]["value"] == pytest.approx(4 / 3 * 3 ** -0.25)
    w = run_experiment(config("weights", {"weight": {"kind": "power", "gamma": 1, "n": 1}, "quantity": "ap",
                                          "xi": 2, "grid": {"centers": [[0]], "radii": [1]}}))
    assert w[0]["verdict"] == "Divergent"


def test_module_errors_do_not_abort_batch():
    bad = {**C12, "lam_i": [-0.5], "lam": -0.5}
    records = run_experiment(config("constant", batch=[bad, C12]))
    assert records[0]["verdict"] == "HypothesisViolation"
    assert "1+λq>0" in records[0]["message"]
    assert records[1]["value"] == pytest.approx(4 / 3)


def test_exit_codes(tmp_path, capsys):
    good = write(tmp_path, config("constant", C12))
    assert main(["--config", good, "--out", str(tmp_path / "o.csv")]) == 0
    bad = dict(C12)
    del bad["q"]
    assert main(["--config", write(tmp_path, config("constant", bad), "bad.json")]) == 2
    failing = write(tmp_path, config("constant", {**C12, "lam_i": [-0.5], "lam": -0.5}), "fail.json")
    assert main(["--config", failing]) == 1
    capsys.readouterr()


def test_overrides_and_timing(tmp_path, capsys):
    path = write(tmp_path, config("constant", C12))
    assert main(["--config", path, "--seed", "7", "--tol", "1e-10", "--kmin", "-20", "--kmax", "20"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[5] == "7" and row[6] == ""
    assert main(["--config", path, "--timing"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(row[6]) >= 0.0


def test_console_entry_point(tmp_path):
    path = write(tmp_path, config("constant", C12))
    res = subprocess.run([sys.executable, "-m", "hausdorff_bounds", "--config", path, "--format", "json"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)[0]["value"] == pytest.approx(4 / 3)
