from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from pfamassey.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run_json(capsys, *argv):
    code = main([*argv, "--json", "-"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_eta_report(capsys):
    code, report = run_json(capsys, "eta", "--n", "4")
    assert code == EXIT_OK
    assert report["schemaVersion"] == "1.0"
    assert [r["integral"] for r in report["rows"]] == ["1/1", "2/1", "1/1", "0/1", "-1/30"]


def test_gutt_with_transfer(capsys):
    code, report = run_json(capsys, "gutt", "--lie", "sl2", "--n", "2", "--verify-transfer")
    assert code == EXIT_OK
    assert report["certificates"] == {"transfer = closed form": True}
    assert len(report["rows"]) == 9


def test_gutt_from_toml_config(capsys):
    code, report = run_json(capsys, "gutt", "--config", str(CONFIGS / "gutt_sl2.toml"), "--n", "1")
    assert code == EXIT_OK and report["lieAlgebra"]["name"] == "sl2"


def test_massey_report(capsys):
    code, report = run_json(capsys, "massey", "--config", str(CONFIGS / "envelope_h3.toml"))
    assert code == EXIT_OK
    assert report["phi0"] == "1/9"
    assert all(report["certificates"].values())


def test_corrupted_sign_is_caught(capsys):
    code, report = run_json(capsys, "massey", "--debug-corrupt-sign")
    assert code == EXIT_MISMATCH
    assert report["certificates"]["cocycle residuals vanish"] is False


def test_chern_simons_l_invariant(capsys):
    code, report = run_json(capsys, "l-invariant", "--config", str(CONFIGS / "chernsimons.toml"))
    assert code == EXIT_OK
    values = {(e["x"], e["y"]): e["L"]["text"] for row in report["matrix"] for e in row}
    assert values == {("[1]", "[1]"): "0", ("[1]", "[θ]"): "1", ("[θ]", "[1]"): "1", ("[θ]", "[θ]"): "0"}


def test_clockwise_configuration_is_a_mismatch(capsys):
    code, report = run_json(capsys, "l-invariant", "--configuration", "clockwise")
    assert code == EXIT_MISMATCH
    assert report["certificates"]["L = bracket on generators"] is False


def test_budget_exhaustion_exit_code(capsys):
    assert main(["l-invariant", "--lie", "sl2", "--budget-degree", "1"]) == EXIT_BUDGET
    assert "budget exhausted" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["massey", "--lie", "nosuch"],
    ["l-invariant", "--configuration", "spiral"],
    ["eta", "--n", "0"],
    ["massey", "--config", "/nonexistent.toml"],
    ["massey", "--budget-degree", "0"],
])
def test_configuration_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_unknown_config_keys(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"theory": "envelope", "colour": "blue"}))
    assert main(["massey", "--config", str(p)]) == EXIT_CONFIG
    assert "colour" in capsys.readouterr().err


def test_json_file_and_text_output(tmp_path, capsys):
    out = tmp_path / "eta.json"
    assert main(["eta", "--n", "2", "--json", str(out)]) == EXIT_OK
    assert "[PASS] Bernoulli recurrence" in capsys.readouterr().out
    assert json.loads(out.read_text())["status"] == "pass"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pfamassey", "eta", "--n", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "eta: PASS" in proc.stdout


def test_reports_are_byte_identical(capsys):
    main(["massey", "--lie", "sl2", "--json", "-"])
    first = capsys.readouterr().out
    main(["massey", "--lie", "sl2", "--json", "-"])
    assert capsys.readouterr().out == first


def test_abelian_algebra_has_trivial_massey_and_l(capsys):
    code, report = run_json(capsys, "massey", "--lie", "abelian2")
    assert code == EXIT_OK and all(v["beta"]["text"] == "0" for v in report["values"])
    code, report = run_json(capsys, "l-invariant", "--lie", "abelian2")
    assert code == EXIT_OK and all(e["L"]["text"] == "0" for row in report["matrix"] for e in row)


def test_gutt_h3_square(capsys):
    code, report = run_json(capsys, "gutt", "--lie", "h3", "--n", "2")
    row = next(r for r in report["rows"] if (r["x"], r["y"]) == ("X", "Y"))
    assert row["closed"]["text"] == "X Z + X^2 Y"


def test_grid_refinement_from_config(tmp_path, capsys):
    p = tmp_path / "fine.toml"
    p.write_text('theory = "chernSimons"\n[grid]\nrefinement = 2\n')
    code, report = run_json(capsys, "massey", "--config", str(p))
    assert code == EXIT_OK and report["config"]["budget"]["gridRefinement"] == 2
    p.write_text('[grid]\npitch = "1/2"\n')
    assert main(["massey", "--config", str(p)]) == EXIT_CONFIG
