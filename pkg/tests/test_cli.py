import json

import pytest

from cli_cases import NOOP_PROGRAM, REPRESENTATIVE, fill
from ktop.cli import main, parse_args, read_config
from ktop.errors import UsageError


@pytest.fixture
def prog(tmp_path):
    p = tmp_path / "prog.txt"
    p.write_text(NOOP_PROGRAM)
    return p


def run_json(capsys, argv):
    code = main(["--json", *argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.mark.parametrize("label,argv", REPRESENTATIVE, ids=[c[0] for c in REPRESENTATIVE])
def test_round_trip(label, argv, prog, tmp_path, capsys):
    code, doc = run_json(capsys, fill(argv, prog))
    assert code == 0, doc
    assert set(doc) == {"status", "value", "certificate", "fuel_used"}
    assert doc["status"] == "ok"
    saved = tmp_path / "result.json"
    saved.write_text(json.dumps(doc))
    code, check = run_json(capsys, ["--verify", str(saved)])
    assert code == 0 and check["value"] is True


def test_tampered_value_fails_verify(tmp_path, capsys):
    code, doc = run_json(capsys, ["wso", "--machine", "ACCEPT WHEN HAS {3}"])
    doc["value"] = 3
    doc["certificate"]["n"] = 3
    saved = tmp_path / "bad.json"
    saved.write_text(json.dumps(doc))
    code, check = run_json(capsys, ["--verify", str(saved)])
    assert code == 4 and check["status"] == "invalid_certificate"


def test_tampered_modulus_fails_verify(tmp_path, capsys):
    _, doc = run_json(capsys, ["modulus", "--fn", "3*x", "--at", "0", "--eps", "1/8"])
    doc["value"] = doc["certificate"]["delta"] = "1/4"
    saved = tmp_path / "bad.json"
    saved.write_text(json.dumps(doc))
    assert main(["--verify", str(saved)]) == 4


def test_verify_without_certificate_is_usage_error(tmp_path, capsys):
    saved = tmp_path / "null.json"
    saved.write_text(json.dumps({"status": "ok", "value": 1, "certificate": None,
                                 "fuel_used": None}))
    assert main(["--verify", str(saved)]) == 2


def test_budget_exhaustion_exit_code(capsys):
    code, doc = run_json(capsys, ["support", "--machine", "ACCEPT NEVER", "--point", "naturals",
                                  "--budget", "50"])
    assert code == 3 and doc["status"] == "budget_exhausted"


def test_premise_failure_exit_code(capsys):
    code, doc = run_json(capsys, ["wso", "--machine", "ACCEPT NEVER", "--budget", "100"])
    assert code == 4 and doc["status"] == "premise_failed"


def test_contradiction_exit_code(capsys):
    code, doc = run_json(capsys, ["spreen", "--space", "cantor", "--point", "bits:0",
                                  "--machine", "ACCEPT ALWAYS", "--avoid", "bit:2=1"])
    assert code == 4 and doc["status"] == "contradiction"
    assert doc["certificate"]["kind"] == "contradiction"


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["wso", "--machine", "ACCEPT WHEN HAS {3}", "--budget", "0"],
    ["wso", "--machine", "ACCEPT SOMETIMES"], ["modulus", "--fn", "x/3", "--at", "0",
                                               "--eps", "1/8"],
    ["spreen", "--space", "reals", "--point", "0", "--machine", "ACCEPT ALWAYS",
     "--avoid", "bit:1=1"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_text_mode(capsys):
    assert main(["wso", "--machine", "ACCEPT WHEN HAS {3}"]) == 0
    out = capsys.readouterr().out
    assert "status: ok" in out and "value: 4" in out


def test_budget_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "ktop.conf"
    cfg.write_text("# settings\nbudget = 500\nseed = 9\n")
    argv = ["wso", "--machine", "ACCEPT ALWAYS"]
    monkeypatch.setenv("KTOP_BUDGET", "700")
    assert parse_args(argv).budget == 700
    assert parse_args([*argv, "--config", str(cfg)]).budget == 500
    assert parse_args([*argv, "--config", str(cfg)]).seed == 9
    assert parse_args([*argv, "--config", str(cfg), "--budget", "42"]).budget == 42
    monkeypatch.delenv("KTOP_BUDGET")
    assert parse_args(argv).budget == 10**6


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "ktop.conf"
    cfg.write_text("fuel = 3\n")
    with pytest.raises(UsageError):
        read_config(str(cfg))


def test_config_json_flag(tmp_path, capsys):
    cfg = tmp_path / "ktop.conf"
    cfg.write_text('json = "true"\n')
    assert main(["wso", "--machine", "ACCEPT ALWAYS", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 0
