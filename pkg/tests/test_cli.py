import json
import math
import os

import pytest

from diagsum import experiments
from diagsum.cli import GRAMMAR, run
from diagsum.forms import product_form
from diagsum.io import CSV_COLUMNS, read_plot_file, save_form

pytestmark = pytest.mark.usefixtures("isolated_config")


def _json(capsys, argv):
    code = run(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_constant_table(capsys):
    code = run(["constant", "--m", "2", "--n", "16", "--p", "4,4", "--s", "2"])
    out = capsys.readouterr().out
    assert code == 0
    lines = dict(line.split(None, 1) for line in out.splitlines())
    assert lines["regime"] == "T2b"
    assert lines["constant"] == "1"


def test_constant_json_with_theorem1(capsys):
    code, data = _json(capsys, ["constant", "--m", "2", "--n", "16", "--p", "4,4", "--s", "1",
                                "--theorem1"])
    assert code == 0
    assert data["regime"] == "T2b"
    assert data["constant"] == 4.0
    assert data["theorem1"]["regime"] == "T1a"
    assert data["theorem1"]["exponent_of_n"] == "1/2"
    assert data["theorem1"]["gap_to_exact"] == "0"


@pytest.mark.parametrize("argv", [
    ["constant", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1", "--theorem1"],
    ["constant", "--m", "2", "--n", "4", "--p", "1,4", "--s", "1", "--theorem1"],
    ["constant", "--m", "2", "--n", "4", "--p", "3/2,3/2", "--s", "1/2", "--theorem1"],
])
def test_out_of_regime_exits_2(capsys, argv):
    assert run(argv) == 2
    assert "out of regime" in capsys.readouterr().err


def test_norm_product_form(capsys):
    code, data = _json(capsys, ["norm", "--form", "product", "--m", "2", "--n", "2", "--p", "4,4"])
    assert code == 0
    assert data["value"] == pytest.approx(math.sqrt(2), rel=1e-9)
    assert data["kind"] == "lower-bound"
    assert data["method"] == "alternating-ascent"
    assert len(data["witnesses"]) == 2


def test_norm_from_file(tmp_path, capsys):
    path = tmp_path / "identity.json"
    save_form(str(path), product_form(2, 3))
    code, data = _json(capsys, ["norm", "--form", "file", str(path), "--p", "2,2"])
    assert code == 0
    assert data["kind"] == "exact-oracle"
    assert data["value"] == pytest.approx(1.0, rel=1e-12)


def test_norm_random_with_overrides_is_deterministic(capsys):
    argv = ["norm", "--form", "random", "--m", "3", "--n", "3", "--p", "3,3,3",
            "--starts", "4", "--max-sweeps", "50", "--seed", "5", "--format", "csv"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first
    header, row = first.splitlines()
    assert header.startswith("m,n,p_list,form,norm_value")
    assert "random(seed=5,distribution=gaussian)" in row


@pytest.mark.parametrize("argv", [
    ["norm", "--form", "random", "--p", "2,2"],
    ["norm", "--form", "banana", "--m", "2", "--n", "2", "--p", "2,2"],
    ["norm", "--form", "product", "--m", "2", "--n", "2", "--p", "2,2,2"],
    ["norm", "--form", "file", "/nonexistent/form.json", "--p", "2,2"],
])
def test_norm_input_errors_exit_1(capsys, argv):
    assert run(argv) == 1


def test_verify_example(capsys):
    code, data = _json(capsys, ["verify", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1",
                                "--trials", "100"])
    assert code == 0
    assert data["violation_count"] == 0
    assert data["trials"] == 100
    assert data["seed"] == 12345


def test_verify_csv_without_violations_is_header_only(capsys):
    assert run(["verify", "--m", "2", "--n", "3", "--p", "2,2", "--s", "2", "--trials", "20",
                "--format", "csv"]) == 0
    assert capsys.readouterr().out == ",".join(CSV_COLUMNS) + "\n"


def test_verify_violation_exits_3(monkeypatch, capsys):
    monkeypatch.setattr(experiments, "best_constant", lambda q: 1e-6)
    code, data = _json(capsys, ["verify", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1",
                                "--trials", "10"])
    assert code == 3
    assert data["violation_count"] == 10


def test_verify_complex_mode_never_gates(monkeypatch, capsys):
    monkeypatch.setattr(experiments, "best_constant", lambda q: 1e-6)
    code, data = _json(capsys, ["verify", "--m", "2", "--n", "3", "--p", "1,1", "--s", "1",
                                "--trials", "5", "--complex"])
    assert code == 0
    assert data["informational"] is True
    assert data["violation_count"] == 5


def test_search_is_byte_deterministic(capsys):
    argv = ["search", "--m", "2", "--n", "3", "--p", "3,3", "--s", "1", "--trials", "3",
            "--steps", "3", "--seed", "7", "--format", "json"]
    outputs = []
    for _ in range(2):
        assert run(argv) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    data = json.loads(outputs[0])
    assert data["best_ratio"] >= 3 ** 0.5 * (1 - 1e-9)
    assert data["record"]["seed"] == 7


def test_fit_writes_plot_file(tmp_path, capsys):
    plot = tmp_path / "plot.dat"
    code, data = _json(capsys, ["fit", "--m", "2", "--p", "1,1", "--s", "1", "--ngrid", "2,4,8,16",
                                "--trials", "2", "--steps", "2", "--plot", str(plot)])
    assert code == 0
    assert abs(data["fit"]["slope"] - 1.0) <= 0.05
    assert data["predicted_exponent"] == "1"
    rows = read_plot_file(str(plot))
    assert [round(math.exp(x)) for x, _ in rows] == [2, 4, 8, 16]


def test_fit_needs_three_points(tmp_path, capsys):
    assert run(["fit", "--m", "2", "--p", "1,1", "--s", "1", "--ngrid", "2,4",
                "--plot", str(tmp_path / "p.dat")]) == 1


def test_out_option_writes_file(tmp_path, capsys):
    out = tmp_path / "constant.csv"
    assert run(["constant", "--m", "2", "--n", "9", "--p", "2,2", "--s", "2", "--format", "csv",
                "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    header, row = out.read_text().splitlines()
    assert header == ",".join(CSV_COLUMNS)
    assert row.startswith("2,9,2;2,2,T2a,3.0,")


def test_session_folder(tmp_path, capsys):
    assert run(["constant", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1", "--session"]) == 0
    session = tmp_path / "outputs"
    assert (session / "constant.txt").exists()
    assert (session / "parameters.json").exists()
    log = (session / "log.txt").read_text(encoding="utf-8")
    assert "exit code 0" in log
    assert "--- Results ---" in log


def test_config_file_sets_budget(tmp_path, capsys):
    config = tmp_path / "custom.json"
    config.write_text(json.dumps({"normest": {"starts": 3}}))
    code, data = _json(capsys, ["norm", "--form", "product", "--m", "2", "--n", "2", "--p", "4,4",
                                "--config", str(config)])
    assert code == 0
    assert data["starts_used"] == 3


@pytest.mark.parametrize("argv", [
    [],
    ["constant", "--m", "2"],
    ["constant", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1", "--bogus"],
    ["constant", "--m", "2", "--n", "4", "--p", "0,1", "--s", "1"],
    ["constant", "--m", "2", "--n", "4", "--p", "1,1", "--s", "-1"],
    ["frobnicate"],
])
def test_usage_errors_echo_the_grammar(capsys, argv):
    assert run(argv) == 1
    err = capsys.readouterr().err
    assert GRAMMAR in err


def test_help_exits_0(capsys):
    assert run(["constant", "--help"]) == 0
    assert "--theorem1" in capsys.readouterr().out


def test_no_default_config_is_written(isolated_config, capsys):
    run(["constant", "--m", "2", "--n", "4", "--p", "1,1", "--s", "1"])
    assert not os.path.exists(isolated_config / "config.json")


RECORD_KEYS = {"m", "n", "p_list", "s", "regime", "theoretical_constant", "measured_ratio",
               "form_descriptor", "norm", "seed", "scalar_mode", "informational"}
NORM_KEYS = {"value", "kind", "method", "sweeps", "starts_used", "degenerate"}


def _check_record(record):
    assert set(record) == RECORD_KEYS
    assert set(record["norm"]) == NORM_KEYS
    assert isinstance(record["measured_ratio"], float)
    assert all(isinstance(p, str) for p in record["p_list"])


@pytest.mark.parametrize("argv, keys", [
    (["constant", "--m", "2", "--n", "9", "--p", "2,2", "--s", "2"],
     {"m", "n", "p_list", "s", "regime", "exponent_of_n", "constant", "tags"}),
    (["norm", "--form", "product", "--m", "2", "--n", "3", "--p", "1,1"],
     {"m", "n", "p_list", "form", "scalar_mode", "seed", "witnesses"} | NORM_KEYS),
    (["verify", "--m", "2", "--n", "3", "--p", "1,1", "--s", "1", "--trials", "5"],
     {"m", "n", "p_list", "s", "regime", "theoretical_constant", "trials", "skipped", "seed",
      "max_ratio", "violation_count", "violations", "informational"}),
    (["search", "--m", "2", "--n", "3", "--p", "1,1", "--s", "1", "--trials", "2", "--steps", "2"],
     {"best_ratio", "record"}),
    (["fit", "--m", "2", "--p", "1,1", "--s", "1", "--ngrid", "2,3,4", "--trials", "1",
      "--steps", "1"],
     {"records", "fit", "predicted_exponent", "skipped", "plot_file"}),
])
def test_json_output_matches_documented_schema(capsys, argv, keys):
    code, data = _json(capsys, argv)
    assert code == 0
    assert set(data) == keys
    if "record" in data:
        _check_record(data["record"])
    for record in data.get("records", []) + data.get("violations", []):
        _check_record(record)
    if "fit" in data:
        assert set(data["fit"]) == {"points", "slope", "intercept", "residual"}


def test_fit_jsonl_writes_one_record_per_line(capsys):
    argv = ["fit", "--m", "2", "--p", "1,1", "--s", "1", "--ngrid", "2,4,8", "--trials", "1",
            "--steps", "1", "--format", "jsonl"]
    assert run(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    objects = [json.loads(line) for line in lines]
    assert [obj["n"] for obj in objects[:3]] == [2, 4, 8]
    for record in objects[:3]:
        _check_record(record)
    assert set(objects[3]) == {"fit", "predicted_exponent", "skipped", "plot_file"}


def test_verify_jsonl_ends_with_summary(monkeypatch, capsys):
    monkeypatch.setattr(experiments, "best_constant", lambda q: 1e-6)
    assert run(["verify", "--m", "2", "--n", "3", "--p", "1,1", "--s", "1", "--trials", "4",
                "--format", "jsonl"]) == 3
    objects = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(objects) == 5
    for record in objects[:4]:
        _check_record(record)
    assert objects[4]["violation_count"] == 4
    assert "violations" not in objects[4]


def test_fit_session_logs_progress_and_skipped_points(tmp_path, capsys):
    assert run(["fit", "--m", "3", "--p", "1,1,1", "--s", "1", "--ngrid", "2,3,4,216",
                "--trials", "1", "--steps", "1", "--session"]) == 0
    session = tmp_path / "outputs"
    log = (session / "log.txt").read_text(encoding="utf-8")
    assert log.count("[PROGRESS] n=") == 3
    assert "[WARNING] n=216 skipped" in log
    assert (session / "fit_plot.dat").exists()


def test_norm_file_order_mismatch_exits_1(tmp_path, capsys):
    path = tmp_path / "cube.json"
    save_form(str(path), product_form(3, 2))
    assert run(["norm", "--form", "file", str(path), "--m", "2", "--p", "1,1"]) == 1
    assert "disagrees with the file" in capsys.readouterr().err
