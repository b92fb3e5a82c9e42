import csv
import io
import json
import subprocess
import sys

import pytest

from wpduality.cli import main
from wpduality.interferometer import orbit_preparations


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_curves_stdout(capsys):
    code, out, _ = run(["curves", "--grid", "101"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    disc = {float(r["P"]): float(r["V"]) for r in rows if r["space"] == "disc"}
    assert disc[0.6] == pytest.approx(0.8, abs=1e-9)
    line = [r for r in rows if r["space"] == "nc_bound"]
    assert len(line) == 101


def test_curves_files(tmp_path, capsys):
    code, _, _ = run(["curves", "--grid", "11", "--out", str(tmp_path)], capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["curve_diamond.csv", "curve_disc.csv", "curve_polygon6.csv",
                     "curve_square.csv", "tradeoff.csv"]


def test_curves_validation_writes_nothing(tmp_path, capsys):
    out = tmp_path / "o"
    code, _, err = run(["curves", "--grid", "1", "--out", str(out)], capsys)
    assert code == 2 and not out.exists()
    code, _, err = run(["curves", "--spaces", "disc,blob", "--out", str(out)], capsys)
    assert code == 2 and "blob" in err and not out.exists()


def test_witness_examples(capsys):
    code, out, _ = run(["witness", "--r", "0.75"], capsys)
    assert code == 0 and "1.366025" in out and "violates noncontextual bound" in out
    code, out, _ = run(["--json", "witness", "--r", "0.5"], capsys)
    d = json.loads(out)
    assert d["V_plus_P"] == pytest.approx(1.0) and d["verdict"] == "bound saturated, no violation"


def test_out_of_range_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["witness", "--r", "1.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--r", "0.5", "--shots", "0", "--seed", "1"])
    assert exc.value.code == 2


def test_json_errors(tmp_path, capsys):
    code, _, err = run(["nc-model", "--in", str(tmp_path / "missing.json"), "--json"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["orbit-check", "--in", str(bad)], capsys)
    assert code == 2 and "not valid JSON" in err


def test_orbit_and_nc_model_from_file(tmp_path, capsys):
    f = tmp_path / "q.json"
    f.write_text(json.dumps(orbit_preparations(0.75).to_json()))
    code, out, _ = run(["orbit-check", "--in", str(f)], capsys)
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(["nc-model", "--in", str(f)], capsys)
    d = json.loads(out)
    assert code == 0 and d["status"] == "infeasible" and d["certificate"]["verified"]


def test_invalid_orbit_file_exit_2(tmp_path, capsys):
    q = orbit_preparations(0.75).to_json()
    q["states"][3] = {"kind": "state", "coords": [1, 0, 0, 0]}
    f = tmp_path / "q.json"
    f.write_text(json.dumps(q))
    code, _, err = run(["nc-model", "--in", str(f)], capsys)
    assert code == 2 and "OrbitInvalid" not in err and "not an orbit" in err


def test_infeasible_hull_exit_3(tmp_path, capsys):
    fit = {"unit_effect": [1, 0, 0], "rank": 3, "prep_ids": ["a", "b"],
           "measurements": ["Z", "X"],
           "states": [[1, 0.1, 0.6], [1, -0.1, 0.7]],
           "effects": [{"measurement": "Z", "plus": [0.5, 0, 0.5], "minus": [0.5, 0, -0.5]},
                       {"measurement": "X", "plus": [0.5, 0.5, 0], "minus": [0.5, -0.5, 0]}],
           "training_residual": 0.0, "holdout_residual": None}
    f = tmp_path / "fit.json"
    f.write_text(json.dumps(fit))
    code, _, err = run(["secondary", "--fit", str(f), "--json"], capsys)
    assert code == 3 and json.loads(err)["error"] == "InfeasibleOrbit"


def test_simulate_tomography_secondary_chain(tmp_path, capsys):
    counts, fit = tmp_path / "c.csv", tmp_path / "fit.json"
    assert run(["simulate", "--r", "0.75", "--shots", "20000", "--seed", "3",
                "--noise", "0.05", "--out", str(counts)], capsys)[0] == 0
    assert counts.read_text().startswith("prep_id,measurement,outcome,count,shots\n")
    assert run(["tomography", "--in", str(counts), "--out", str(fit), "--restarts", "1"], capsys)[0] == 0
    code, out, _ = run(["secondary", "--fit", str(fit)], capsys)
    assert code == 0 and "violates noncontextual bound" in out


def test_tomography_bad_csv(tmp_path, capsys):
    f = tmp_path / "c.csv"
    f.write_text("a,b\n1,2\n")
    code, _, err = run(["tomography", "--in", str(f)], capsys)
    assert code == 2 and "header" in err


def test_pipeline_is_byte_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["pipeline", "--r", "0.75", "--shots", "20000", "--noise", "0.05", "--seed", "2"]
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b)], capsys)[0] == 0
    for name in ("counts.csv", "fit.json", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert json.loads((a / "report.json").read_text())["V_plus_P"] > 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wpduality", "witness", "--r", "0.75"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "1.366025" in res.stdout
