import csv
import io
import json
import subprocess
import sys

import pytest

from sgtriple.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_dims_json(capsys):
    code, out, _ = run(capsys, "dims", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    row = doc["rows"][0]
    assert row["d"] == pytest.approx(1.5849625007211563)
    assert row["delta"] == pytest.approx(1.263034405833794)
    assert doc["config"]["regimes"] == {"energy": True, "metric": True, "volume": True}


def test_energy_exact_invariance(capsys):
    code, out, _ = run(capsys, "energy", "--boundary", "1,0,0", "--m", "3")
    assert code == 0
    table = rows(out)
    assert [r["level"] for r in table] == ["0", "1", "2", "3"]
    assert all(r["exact"] == "2" and r["invariant"] == "true" for r in table)


def test_energy_accepts_constant_boundary(capsys):
    code, out, _ = run(capsys, "energy", "--boundary", "0,0,0", "--m", "2")
    assert code == 0
    assert all(r["exact"] == "0" for r in rows(out))


def test_boundary_parse_errors(capsys):
    assert run(capsys, "energy", "--boundary", "1,0")[0] == 3
    assert run(capsys, "energy", "--boundary", "a,b,c")[0] == 3
    assert run(capsys, "volume", "--tau", "0,x")[0] == 3
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 3


def test_boundary_from_csv_file(capsys, tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("vertex,value\n0,1\n1,0\n2,0\n")
    code, out, _ = run(capsys, "energy", "--boundary", str(path), "--m", "1")
    assert code == 0 and rows(out)[-1]["exact"] == "2"


def test_clausen_closed_form(capsys):
    code, out, _ = run(capsys, "clausen", "--alpha", "0.5", "--grid", "100")
    assert code == 0
    table = rows(out)
    assert len(table) == 99
    for r in table:
        assert abs(float(r["ci"]) - float(r["closed_form"])) <= float(r["abs_error_bound"]) + 1e-14


def test_regime_exit_code(capsys):
    code, _, err = run(capsys, "volume", "--alpha", "0.5")
    assert code == 2 and "regime" in err
    code, _, _ = run(capsys, "distance", "0:1", "--beta", "1.2")
    assert code == 2


def test_distance_table(capsys):
    code, out, _ = run(capsys, "distance", "0:1", "--m", "2")
    assert code == 0
    (r,) = rows(out)
    assert float(r["lower"]) == pytest.approx(1.8367643609, rel=1e-6)
    assert r["within_envelopes"] == "true"


def test_pairing_outputs(capsys):
    code, out, _ = run(capsys, "pairing", "--k", "3", "--format", "csv")
    assert code == 0 and rows(out)[0]["pairing"] == "3"
    code, out, _ = run(capsys, "pairing", "--generators", "0,0,1", "--level", "1", "--format", "csv")
    assert {r["lacuna"]: r["pairing"] for r in rows(out)} == {"()": "0", "0": "2", "1": "1", "2": "0"}


def test_output_file(capsys, tmp_path):
    target = tmp_path / "dims.json"
    code, out, _ = run(capsys, "dims", "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["rows"][0]["d_D"] > 1


def test_cache_directory(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SGTRIPLE_CACHE_DIR", str(tmp_path))
    argv = ("residue", "--boundary", "1,0,0", "--m", "1", "--L", "6")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    assert len(list(tmp_path.iterdir())) == 1
    code, second, _ = run(capsys, *argv)
    assert first == second
    assert json.loads(first)["rows"][0]["rel_err"] < 1e-2


def test_reruns_are_byte_identical():
    cmd = [sys.executable, "-m", "sgtriple", "energy", "--boundary", "0.3,-1,2", "--m", "4"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
