import json
import os

import pytest

from ktrg.cli import main


def test_no_command_usage_error(capsys):
    assert main([]) == 2


def test_unknown_flag_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["decompose", "--bogus"])
    assert e.value.code == 2


def test_decompose_artifact_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["decompose", "--L", "3", "--R", "2", "--m", "0.1", "--out-dir", str(out1)]) == 0
    assert main(["decompose", "--L", "3", "--R", "2", "--m", "0.1", "--out-dir", str(out2)]) == 0
    a = (out1 / "stack_L3_R2.csv").read_bytes()
    b = (out2 / "stack_L3_R2.csv").read_bytes()
    assert a == b


def test_verify_all_report(tmp_path):
    assert main(["verify-all", "--out-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["all_pass"] is True
    assert set(rep["checks"]) >= {"telescoping", "leakage", "psd", "separatrix_agreement", "count_S", "siegert_kac"}
    for c in rep["checks"].values():
        assert set(c) == {"value", "tol", "pass"}


def test_verify_all_forced_failure(tmp_path, capsys):
    # an impossible leakage tolerance must fail and name the check
    code = main(["verify-all", "--leakage-tol", "0", "--out-dir", str(tmp_path)])
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL leakage" in out
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["checks"]["leakage"]["pass"] is False


def test_config_file_drives_command(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("# desk-scale run\n[decompose]\nL = 3\nR = 2\nm = 0.25  # mass\n")
    assert main(["decompose", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "stack_L3_R2.csv").exists()


def test_missing_config_is_usage_error(tmp_path):
    assert main(["decompose", "--config", str(tmp_path / "nope.ini"), "--out-dir", str(tmp_path)]) == 2


def test_polymers_command(tmp_path, capsys):
    assert main(["polymers", "--out-dir", str(tmp_path)]) == 0
    body = (tmp_path / "polymers.csv").read_text()
    assert "count_S,99" in body


def test_oracle_command(tmp_path):
    assert main(["oracle", "--side", "3", "--nmax", "2", "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "oracle_side3.csv").read_text().splitlines()
    assert lines[0] == "m,n,Q,term"
    assert len(lines) > 5
