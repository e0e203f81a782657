import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhs_spectra import BarrierConfig, make_spectral_test_function
from rhs_spectra.cli import build_config, csv_text, fmt_energy, fmt_float, parse_grid, run
from rhs_spectra.errors import ConfigError


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    s = fmt_float(x)
    assert float(s) == x
    assert len(s.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_energy_format():
    assert fmt_energy(2.0) == "2.0"
    assert fmt_energy(3 + 0.5j) == "3.0+0.5j"
    assert fmt_energy(3 - 0.5j) == "3.0-0.5j"


def test_csv_text_layout():
    text = csv_text(["E", "rho"], [(1.0, 0.5)])
    assert text == "E,rho\n1.0,0.5\n"


def test_rho_row(tmp_path, capsys):
    cfg = _write(tmp_path, '[barrier]\nv0 = 0.0\n[eval]\nquantity = "rho"\nenergies = [1.0]\n')
    out = tmp_path / "rho.csv"
    assert run(["eval", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_bytes().split(b"\n")
    assert lines[0] == b"E,rho"
    assert lines[1] == ("1.0," + repr(1 / math.pi)).encode()
    assert b"\r" not in out.read_bytes()
    sidecar = json.loads((tmp_path / "rho.csv.json").read_text())
    assert sidecar["barrier"]["v0"] == 0.0


def test_chi_row(tmp_path, capsys):
    cfg = _write(tmp_path, '[barrier]\nv0 = 0.0\n[eval]\nenergies = [1.0]\nr = [1.5707963267948966]\n')
    assert run(["eval", "--config", cfg, "--stdout"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["r", "E", "family", "re", "im"]
    assert rows[1][2] == "Chi"
    assert float(rows[1][3]) == pytest.approx(1.0, abs=1e-15)
    assert float(rows[1][4]) == 0.0


def test_green_dump_symmetric(tmp_path):
    cfg = _write(tmp_path, '[eval]\nquantity = "green"\nenergies = [-1.0]\nr = [0.5, 1.5, 2.5, 4.0]\n')
    out = tmp_path / "g.csv"
    assert run(["eval", "--config", cfg, "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["r", "s", "Ere", "Eim", "re", "im"]
    table = {(r[0], r[1]): r[4:] for r in rows[1:]}
    assert len(table) == 16
    for (r, s), val in table.items():
        assert table[(s, r)] == val


def test_stdout_matches_file(tmp_path, capsys):
    cfg = _write(tmp_path, '[eval]\nquantity = "rho"\nenergies = [0.5, 2.0]\n')
    out = tmp_path / "x.csv"
    assert run(["eval", "--config", cfg, "--out", str(out), "--stdout"]) == 0
    assert capsys.readouterr().out == out.read_text()


@pytest.mark.parametrize("text", [
    "[eval]\nbogus = 1\n",
    "[nosuch]\nx = 1\n",
    "[eval]\nquantity = \"rho\"\nenergies = [2.0, 1.0]\n",
    "[barrier]\na = 3.0\n",
    "[eval\n",
    "[eval]\nquantity = \"spline\"\n",
    "[test_function]\nkind = \"bump\"\ncenter = 3.0\n[evolve]\ntimes = [0.0]\n",
])
def test_config_errors_exit_2(tmp_path, text, capsys):
    cfg = _write(tmp_path, text)
    cmd = "evolve" if "evolve" in text else "eval"
    assert run([cmd, "--config", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert run(["eval", "--config", str(tmp_path / "absent.toml")]) == 2


def test_toml_error_has_line(tmp_path, capsys):
    cfg = _write(tmp_path, "[eval]\nquantity = \n")
    assert run(["eval", "--config", cfg]) == 2
    assert "line 2" in capsys.readouterr().err


def test_grid_parsing():
    assert parse_grid("g", {"start": 1.0, "stop": 100.0, "num": 3, "log": True}).tolist() == \
        pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(ConfigError):
        parse_grid("g", [1.0, 1.0])
    with pytest.raises(ConfigError):
        build_config({"seed": -1})


@pytest.mark.parametrize("text,cmd", [
    ('[eval]\nquantity = "green"\nenergies = [2.0]\nr = [1.0]\n', "eval"),
    ('[eval]\nquantity = "rho"\nenergies = [-1.0]\n', "eval"),
    ('[eval]\nfamily = "ChiTilde"\nenergies = [2.0]\nr = [1.0]\n', "eval"),
    ('[test_function]\nkind = "bump"\ncenter = 1.0\nhalf_width = 0.5\n[evolve]\ntimes = [0.0]\n', "evolve"),
])
def test_domain_errors_exit_3(tmp_path, text, cmd, capsys):
    assert run([cmd, "--config", _write(tmp_path, text), "--stdout"]) == 3
    assert "domain error" in capsys.readouterr().err


def test_thread_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("RHS_SPECTRA_THREADS", "zero")
    assert run(["report-spectrum", "--stdout"]) == 2
    monkeypatch.setenv("RHS_SPECTRA_THREADS", "2")
    assert run(["report-spectrum", "--stdout"]) == 0


def test_verify_faulty_a2_fails_and_writes_report(tmp_path):
    cfg = _write(tmp_path, '[verify]\nsuites = ["coefficients"]\nfaulty_a2 = true\n')
    out = tmp_path / "report.json"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 1
    report = json.loads(out.read_text())
    assert report["pass"] is False
    failing = {r["name"] for r in report["records"] if not r["pass"]}
    assert "continuity ThetaTilde NegativeRe" in failing
    assert set(report["records"][0]) == {"suite", "name", "ref", "tolerance", "achieved", "pass"}


def test_verify_free_suite_tolerances(tmp_path):
    cfg = _write(tmp_path, '[barrier]\nv0 = 0.0\n[verify]\nsuites = ["free", "wronskian", "conjugate"]\n')
    out = tmp_path / "report.json"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    free = [r for r in report["records"] if r["suite"] == "free"]
    assert free and all(r["achieved"] < 1e-10 for r in free)


def test_transform_round_trip_and_dispersion(tmp_path, capsys):
    base = '[test_function]\nkind = "bump"\ncenter = 3.5\nhalf_width = 1.0\n'
    out = tmp_path / "rt.csv"
    cfg = _write(tmp_path, base + '[transform]\nquantity = "round_trip"\nr = [3.0, 3.5, 4.0]\n')
    assert run(["transform", "--config", cfg, "--out", str(out)]) == 0
    side = json.loads((tmp_path / "rt.csv.json").read_text())
    assert side["round_trip"] < 1e-5
    assert {"r_cutoff", "k_cutoff", "k_nodes", "tail_estimate"} <= set(side["transform"])

    cfg = _write(tmp_path, '[barrier]\nv0 = 0.0\n[test_function]\nkind = "rexp"\namplitude = 2.0\n'
                           '[transform]\nquantity = "dispersion"\n[output]\nformat = "json"\n', "d.toml")
    assert run(["transform", "--config", cfg, "--stdout"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mean"] == pytest.approx(1.0, abs=1e-6)
    assert doc["delta"] == pytest.approx(2.0, abs=1e-6)


def test_evolve_t0_matches_input(tmp_path):
    cfg = _write(tmp_path, '[test_function]\nkind = "spectral"\ne_lo = 2.0\ne_hi = 5.0\n'
                           '[evolve]\ntimes = [0.0, 1.0]\nr = { start = 0.0, stop = 40.0, num = 41 }\n')
    out = tmp_path / "ev.csv"
    assert run(["evolve", "--config", cfg, "--out", str(out)]) == 0
    rows = _rows(out)[1:]
    t0 = np.array([[float(v) for v in row] for row in rows if row[0] == "0.0"])
    phi = make_spectral_test_function(BarrierConfig(), 2.0, 5.0)
    np.testing.assert_allclose(t0[:, 2], phi(t0[:, 1]), atol=1e-10)
    side = json.loads((tmp_path / "ev.csv.json").read_text())
    assert side["norms"][1] == pytest.approx(side["initial_norm"], rel=1e-6)


def test_report_spectrum(tmp_path, capsys):
    cfg = _write(tmp_path, '[test_function]\nkind = "bump"\ncenter = 3.5\nhalf_width = 1.0\n')
    assert run(["report-spectrum", "--config", cfg, "--stdout", "--max-order", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["spectrum"]["point"] == []
    assert doc["membership"]["passed"] is True
    assert len(doc["norms"]) == 4


def test_bad_command_line():
    assert run(["nosuch"]) == 2
    assert run(["eval", "--max-order", "-1"]) == 2


def test_quadrature_failure_exit_4(tmp_path, capsys):
    cfg = _write(tmp_path, '[test_function]\nkind = "bump"\ncenter = 6.0\nhalf_width = 1.0\n'
                           '[evolve]\ntimes = [2.0]\nr = [1.0]\n')
    assert run(["evolve", "--config", cfg, "--stdout"]) == 4
    assert "achieved error estimate" in capsys.readouterr().err
