import csv
import hashlib
import io
import json
import math

import numpy as np
import pytest

from toeplitz_lab import acceptance, cli
from toeplitz_lab.berezin import berezin_extrema
from toeplitz_lab.grids import PolarGrid
from toeplitz_lab.measure import PullBack, lebesgue
from toeplitz_lab.parallel import pmap, worker_count
from toeplitz_lab.report import dumps_csv, dumps_json, emit_report, loads_json
from toeplitz_lab.toeplitz import invertibility_profile

AC_ONE = '{"kind":"ac","density":"one"}'


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_csv_headers():
    rep = berezin_extrema(lebesgue("bergman"), PolarGrid(0.5, 3, 8))
    assert dumps_csv(rep).splitlines()[0] == "z_re,z_im,value"
    prof = invertibility_profile(PullBack.monomial(2), [2, 4])
    assert dumps_csv(prof).splitlines()[0] == "degree,lambda_min,lambda_max"


def test_json_float_formatting():
    text = dumps_json({"a": 0.1, "b": [1.0, math.inf, math.nan], "c": {"d": True, "e": None}, "f": 1 + 2j})
    assert '"a": 0.10000000000000001' in text
    assert "[1, Infinity, NaN]" in text
    data = loads_json(text)
    assert data["a"] == 0.1 and data["f"] == [1.0, 2.0] and math.isnan(data["b"][2])


def test_json_numpy_values_roundtrip():
    payload = {"x": np.float64(1 / 3), "n": np.int64(7), "v": np.arange(3.0), "flag": np.bool_(True)}
    assert loads_json(dumps_json(payload)) == {"x": 1 / 3, "n": 7, "v": [0.0, 1.0, 2.0], "flag": True}


def test_report_roundtrip():
    prof = invertibility_profile(PullBack.monomial(2), [2, 4, 8])
    assert loads_json(dumps_json(prof)) == json.loads(json.dumps(prof.to_json()))


def test_emit_report_to_file(tmp_path):
    prof = invertibility_profile(PullBack.monomial(2), [2, 4])
    path = tmp_path / "p.csv"
    text = emit_report(prof, "csv", str(path))
    assert path.read_text() == text
    with pytest.raises(ValueError):
        emit_report(prof, "xml", str(path))


def test_cli_berezin_constant_one(capsys):
    status, out, _ = run(capsys, "berezin", "--space", "bergman", "--measure", AC_ONE, "--grid-density", "50")
    assert status == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["z_re", "z_im", "value"]
    vals = np.array([float(r[2]) for r in rows[1:]])
    assert len(vals) == 1 + 49 * 100 and np.allclose(vals, 1, atol=1e-10)


def test_cli_deterministic_outputs(tmp_path, capsys):
    digests = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        status, _, _ = run(capsys, "spectrum", "--measure", '{"space":"bergman","kind":"pullback","taylor":[0,0,1]}', "--degrees", "5,10", "--format", "json", "--output", str(path))
        assert status == 0
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_cli_spectrum_csv(capsys):
    status, out, _ = run(capsys, "spectrum", "--measure", '{"space":"bergman","kind":"pullback","taylor":[0,0,1]}', "--degrees", "5,10,20")
    assert status == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["degree", "lambda_min", "lambda_max"]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([6 / 11, 11 / 21, 21 / 41], rel=1e-10)


def test_cli_carleson_json(capsys):
    status, out, _ = run(capsys, "carleson", "--space", "fock", "--measure", AC_ONE, "--grid-density", "5")
    data = json.loads(out)
    assert status == 0 and data["verdict_carleson"] and data["verdict_reverse_condition"]
    assert data["inf_ratio"] == pytest.approx(1, abs=1e-10)


def test_cli_tail_sweep(capsys):
    status, out, _ = run(capsys, "tail", "--space", "fock", "--measure", AC_ONE, "--radii", "1,2,3", "--grid-density", "3")
    rows = list(csv.reader(io.StringIO(out)))
    assert status == 0 and rows[0] == ["radius", "tail_sup", "argmax_re", "argmax_im"]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([2 * math.exp(-R * R / 2) for R in (1, 2, 3)], abs=1e-9)


def test_cli_lattice(capsys):
    status, out, _ = run(capsys, "lattice", "--space", "bergman", "--r", "0.8", "--rings", "6")
    data = json.loads(out)
    assert status == 0 and data["separation_beta"] >= 0.4 - 1e-9 and data["covering_beta"] <= 0.8
    assert data["recheck_covering_beta"] <= data["covering_beta"]
    status, out, _ = run(capsys, "lattice", "--space", "fock", "--r", "2", "--window", "3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["re", "im", "weight"] and len(rows) == 50


def test_cli_counterexample_fock(capsys):
    status, out, _ = run(capsys, "counterexample", "fock", "--r", "3.5", "--window", "12", "--degrees", "10,20,40,60", "--grid-density", "21")
    data = json.loads(out)
    assert status == 0
    text = json.dumps(data)
    assert "lambda_min" in text


def test_cli_rejects_subcritical_fock_lattice(capsys):
    status, _, err = run(capsys, "counterexample", "fock", "--r", "2.4")
    assert status == 1 and "sqrt(2 pi)" in err and err.startswith("error [lattice]")


def test_cli_measure_error_has_pointer(capsys):
    status, _, err = run(capsys, "berezin", "--space", "bergman", "--measure", '{"kind":"atomic","atoms":[[0,0]]}')
    assert status == 2 and "(at /atoms/0)" in err


def test_cli_measure_from_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(AC_ONE)
    status, out, _ = run(capsys, "berezin", "--space", "fock", "--measure", f"@{path}", "--grid-density", "3")
    assert status == 0 and len(out.splitlines()) == 10
    status, _, err = run(capsys, "berezin", "--measure", f"@{tmp_path / 'missing.json'}")
    assert status == 2 and "cannot read" in err


def test_cli_missing_measure_and_unknown_flag(capsys):
    status, _, err = run(capsys, "spectrum")
    assert status == 2 and "--measure" in err
    with pytest.raises(SystemExit):
        cli.main(["spectrum", "--colour", "red"])


def test_cli_csv_not_available(capsys):
    status, _, err = run(capsys, "counterexample", "fock", "--degrees", "10", "--grid-density", "5", "--format", "csv")
    assert status == 2 and "no CSV form" in err


def test_cli_verify_plumbing(monkeypatch, capsys):
    ok = acceptance.CheckResult(1, "stub", True, {"x": 1.0})
    bad = acceptance.CheckResult(2, "stub", False)
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok,))
    status, out, err = run(capsys, "verify")
    assert status == 0 and "[PASS] criterion 1: stub" in err and json.loads(out)["passed"]
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok, lambda: bad))
    status, out, err = run(capsys, "verify")
    assert status == 1 and "[FAIL] criterion 2" in err and "seconds" not in out


def test_thread_cap(monkeypatch, capsys):
    monkeypatch.setenv("TOEPLITZ_LAB_THREADS", "1")
    assert worker_count() == 1
    assert pmap(lambda x: x * x, range(5)) == [0, 1, 4, 9, 16]
    monkeypatch.setenv("TOEPLITZ_LAB_THREADS", "3")
    assert worker_count() == 3 and pmap(lambda x: -x, range(50)) == [-x for x in range(50)]
    monkeypatch.setenv("TOEPLITZ_LAB_THREADS", "many")
    status, _, err = run(capsys, "berezin", "--space", "fock", "--measure", AC_ONE, "--grid-density", "3")
    assert status == 1 and "TOEPLITZ_LAB_THREADS" in err


def test_threads_do_not_change_results(monkeypatch):
    from toeplitz_lab.berezin import berezin_transform

    z = np.linspace(0, 0.9, 7)
    mu = PullBack([0.1, 0.6])
    monkeypatch.setenv("TOEPLITZ_LAB_THREADS", "1")
    a = berezin_transform(mu, z)
    monkeypatch.setenv("TOEPLITZ_LAB_THREADS", "4")
    assert np.array_equal(a, berezin_transform(mu, z))
