import csv
import io
import json

import pytest

from autcstar.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_trace(capsys):
    code, out = run(capsys, "trace", "subfix", "s")
    assert code == 0 and out.strip() == "1/2"


def test_phi(capsys):
    code, out = run(capsys, "phi", "aleshin", "a")
    assert code == 0 and out.strip() == "[[0, b], [c, 0]]"


def test_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.aut"
    bad.write_text("alphabet_size: 2\nstates:\n  t: {output: [1, 1]}\n")
    code, out = run(capsys, "validate", str(bad))
    assert code == 1
    assert json.loads(out)["error"] == "MalformedPermutation"


def test_missing_file(capsys):
    code, out = run(capsys, "validate", "/nonexistent/x.aut")
    assert code == 1 and "error" in json.loads(out)


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["norm", "odo", "a", "--n", "-1"])
    assert info.value.code == 2


def test_csv_outputs(capsys):
    code, out = run(capsys, "norm", "odo", "i*(a - a^-1)", "--max-level", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["n"] for r in rows] == ["0", "1", "2", "3"]
    assert abs(float(rows[3]["value"]) - 2.0) < 1e-8
    code, out = run(capsys, "wedderburn", "odo", "--n", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4 and all(r["d_i"] == "1" for r in rows)


def test_json_envelope(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out = run(capsys, "partition", "subfix", "s", "--depth", "1", "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["input"]["word"] == "s"
    assert doc["parameters"]["depth"] == 1


def test_tensor_then_validate(capsys, tmp_path):
    code, out = run(capsys, "tensor", "odo")
    assert code == 0
    path = tmp_path / "odo1.aut"
    path.write_text(out)
    code, _ = run(capsys, "validate", str(path))
    assert code == 0
