"""
命令行工具測試：結束碼、JSON 報告與參數錯誤
"""

import json

import pytest

from app.config import apply_overrides, settings
from scripts.run_cli import EXIT_OK, EXIT_USAGE, run

DIAG = json.dumps({"Y": [[2, 0], [0, 1]], "Z": [[2, 0], [0, 1]]})
ZERO = json.dumps({"Y": [[0, 0], [0, 0]], "Z": [[0, 0], [0, 0]]})


def _report(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_invariants(capsys):
    assert run(["invariants", "--X", DIAG]) == EXIT_OK
    report = _report(capsys)
    assert report["command"] == "invariants"
    assert report["result"]["Q"] == pytest.approx(5.0)
    assert report["result"]["S"] == pytest.approx(4.0)


def test_classify_zero_is_nilpotent(capsys):
    assert run(["classify", "--X", ZERO]) == EXIT_OK
    result = _report(capsys)["result"]
    assert result["class"] == "Nilpotent"
    assert result["in_U"] is False


def test_input_from_file(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text(DIAG, encoding="utf-8")
    assert run(["normal-form", "--X", f"@{path}"]) == EXIT_OK
    assert _report(capsys)["command"] == "normal-form"


def test_bad_matrix_is_usage_error(capsys):
    assert run(["invariants", "--X", json.dumps({"Y": [[1, 0]], "Z": [[0, 0], [0, 0]]})]) == EXIT_USAGE
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "bad_arguments"


def test_unknown_setting_is_usage_error(capsys):
    assert run(["--set", "NO_SUCH_KEY=1", "invariants", "--X", DIAG]) == EXIT_USAGE


def test_missing_subcommand():
    assert run([]) == EXIT_USAGE


def test_specfun_table_csv(capsys):
    assert run(["--format", "csv", "specfun-table", "--lambda", "1.5", "--t", "0.5", "1.0", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("t,re,im")
    assert len(lines) == 4


def test_eigendist_eval(capsys):
    request = {
        "basis": {"which": "Ana", "lambda1": "1.3+0.4i", "lambda2": -0.7},
        "X": {"Y": [[1.6, 0], [0, 0.5]], "Z": [[1.6, 0], [0, 0.5]]},
    }
    assert run(["eigendist", "eval", "--input", json.dumps(request)]) == EXIT_OK
    value = _report(capsys)["result"]["value"]
    assert set(value) == {"re", "im"}


def test_verify_specfun(capsys, tmp_path):
    out = tmp_path / "report.json"
    assert run(["verify", "specfun", "--output", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["result"]["passed"] == report["result"]["total"] == 3
    assert all(c["passed"] for c in report["checks"])
    assert "suites" in report["tolerances"]


def test_overrides_return_a_copy():
    before = settings.fd_step
    cfg = apply_overrides({"FD_STEP": "5e-4", "fit_probes": "7"})
    assert cfg.fd_step == pytest.approx(5e-4)
    assert cfg.fit_probes == 7
    assert settings.fd_step == before
    assert cfg is not settings


def test_set_applies_to_one_run_only(capsys):
    default = settings.fit_probes
    assert run(["--set", f"FIT_PROBES={default + 3}", "invariants", "--X", DIAG]) == EXIT_OK
    assert _report(capsys)["tolerances"]["fit_probes"] == default + 3
    assert settings.fit_probes == default
    assert run(["invariants", "--X", DIAG]) == EXIT_OK
    assert _report(capsys)["tolerances"]["fit_probes"] == default
