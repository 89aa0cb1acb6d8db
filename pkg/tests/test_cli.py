# tests/test_cli.py
# Comments in English only
from __future__ import annotations

import io

import pandas as pd
import pytest

from tdalab import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, build_parser, main


def _write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_expected_prints_csv(capsys):
    assert main(["expected", "--quantity", "ec", "--alpha", "100", "--levels=-1,0,1"]) == EXIT_OK
    table = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(table.columns) == ["quantity", "param", "value"]
    assert table["param"].tolist() == ["u=-1", "u=0", "u=1"]


def test_expected_coverage(capsys):
    assert main(["expected", "--quantity", "coverage", "--n", "3", "--tau", "0.2", "--coverage-dim", "3"]) == EXIT_OK
    table = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert len(table) == 3
    assert table["value"].iloc[0] == pytest.approx(1.0)


def test_expected_unknown_transform_is_an_input_error(capsys):
    assert main(["expected", "--quantity", "euler-integral", "--transform", "sine"]) == EXIT_ERROR


def test_expected_rejects_unknown_quantity():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["expected", "--quantity", "volume"])


def test_experiment_run(tmp_path, capsys):
    cfg = _write_config(tmp_path / "ec.cfg", "experiment = ec-curve\nsize = 8\nalpha = 10\nlevels = 0\n")
    out = tmp_path / "results"
    code = main(["ec-curve", "--config", str(cfg), "--runs", "4", "--seed", "1", "--out", str(out)])

    assert code == EXIT_OK
    printed = capsys.readouterr().out
    assert "[warn]" in printed or "[PASS]" in printed
    assert (out / "summary.csv").exists()


def test_failed_enforced_check_exits_one(tmp_path, monkeypatch):
    import experiments

    def always_failing(cfg):
        return experiments.ExperimentReport(
            cfg.experiment, pd.DataFrame({"quantity": ["x"]}), [experiments.CheckResult("forced", False)], []
        )

    monkeypatch.setattr("experiment_registry.run_barcode_ec_experiment", always_failing)
    cfg = _write_config(tmp_path / "b.cfg", "experiment = barcode-ec\nsize = 4\n")
    assert main(["barcode-ec", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CHECK_FAILED


def test_missing_config_file(tmp_path):
    assert main(["ec-curve", "--config", str(tmp_path / "missing.cfg")]) == EXIT_ERROR


def test_bad_config_value(tmp_path):
    cfg = _write_config(tmp_path / "bad.cfg", "experiment = ec-curve\nalpha = -3\n")
    assert main(["ec-curve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_ERROR

