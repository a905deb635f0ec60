import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from dmtradeoff.channel_model import AntennaConfig
from dmtradeoff.cli import main
from dmtradeoff.code_criterion import Codebook, make_delay_diversity_codebook
from dmtradeoff.codebook_io import write_codebook


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def dd_book(tmp_path):
    path = tmp_path / "dd.txt"
    write_codebook(path, make_delay_diversity_codebook(AntennaConfig(1, 1), 2, 4))
    return path


# --- parser behaviour ------------------------------------------------------------------

def test_help_exits_zero():
    res = subprocess.run([sys.executable, "-m", "dmtradeoff", "outage", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "default: 100000" in res.stdout


def test_unknown_flag_exits_nonzero():
    res = subprocess.run([sys.executable, "-m", "dmtradeoff", "curve", "--bogus"],
                         capture_output=True, text=True)
    assert res.returncode != 0
    assert "usage" in res.stderr


# --- curve ------------------------------------------------------------------------------

@pytest.mark.parametrize("argv,expected", [
    (["--rho", "2", "--mt", "2", "--mr", "2"], [("0", "8"), ("1", "3"), ("2", "0")]),
    (["--rho", "1"], [("0", "1"), ("1", "0")]),
    (["--taps", "2"], [("0", "2"), ("1", "0")]),
    (["--pdp", "0.5,0.5", "--N", "4"], [("0", "2"), ("1", "0")]),
])
def test_curve_rows(capsys, argv, expected):
    code, out, _ = run(capsys, "curve", *argv)
    assert code == 0
    assert [(r["r"], r["d"]) for r in rows(out)] == expected


def test_curve_sampling(capsys):
    code, out, _ = run(capsys, "curve", "--rho", "1", "--mt", "2", "--mr", "2", "--step", "0.5")
    assert code == 0
    got = {float(r["r"]): float(r["d"]) for r in rows(out)}
    assert got == {0.0: 4.0, 0.5: 2.5, 1.0: 1.0, 1.5: 0.5, 2.0: 0.0}


def test_curve_bad_rank(capsys):
    assert run(capsys, "curve", "--rho", "0")[0] == 2


# --- outage / jensen -------------------------------------------------------------------------

def test_outage_reproduces_closed_form(capsys):
    code, out, _ = run(capsys, "outage", "--event", "mi", "--rates", "0.5", "--snr-db", "20",
                       "--trials", "1000000", "--seed", "3")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == ["snr_db", "r", "mode", "trials", "outages", "p_hat", "ci_lo", "ci_hi"]
    expected = 1 - math.exp(-(100**0.5 - 1) / 100)
    assert float(row["ci_lo"]) <= expected <= float(row["ci_hi"])


@pytest.mark.parametrize("argv", [
    ["--trials", "0"],
    ["--snr-db", "0"],
    ["--rates", "1.5"],
    ["--pdp", "0.5,0.5", "--correlation", "1,0"],
    ["--correlation", "1,2"],
])
def test_outage_rejects_bad_config(capsys, argv):
    code, out, err = run(capsys, "outage", *argv)
    assert code == 2
    assert out == ""
    assert "error" in err


def test_same_seed_byte_identical(capsys):
    argv = ["jensen", "--pdp", "0.5,0.5", "--N", "4", "--mt", "2", "--rates", "0.1,0.5",
            "--snr-db", "10,20", "--trials", "20000", "--seed", "7"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    c = run(capsys, *argv, "--workers", "3")[1]
    assert a == b == c
    assert "\r" not in a


def test_env_seed(capsys, monkeypatch):
    argv = ["outage", "--trials", "5000", "--rates", "0.9"]
    monkeypatch.setenv("DMTRADEOFF_SEED", "99")
    a = run(capsys, *argv)[1]
    assert a == run(capsys, *argv, "--seed", "99")[1]
    assert a != run(capsys, *argv, "--seed", "100")[1]
    monkeypatch.setenv("DMTRADEOFF_SEED", "x")
    assert run(capsys, *argv)[0] == 2


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        '[channel]\npdp = [0.5, 0.5]\nN = 4\n'
        '[antennas]\nm_t = 2\nm_r = 1\n'
        '[simulation]\nsnr_db = [10, 20]\nrates = [0.2]\ntrials = 3000\nseed = 5\n'
    )
    code, out, _ = run(capsys, "outage", "--config", str(cfg), "--trials", "2000")
    assert code == 0
    got = rows(out)
    assert [r["snr_db"] for r in got] == ["10", "20"]
    assert all(r["trials"] == "2000" for r in got)


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[simulation]\ntrails = 10\n")
    assert run(capsys, "outage", "--config", str(cfg))[0] == 2


# --- exponent -----------------------------------------------------------------------------------

def test_exponent_synthetic_injection(capsys, tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("snr_db,p\n10,1e-2\n20,1e-4\n30,1e-6\n")
    code, out, _ = run(capsys, "exponent", "--probabilities", str(path), "--rates", "0.5")
    assert code == 0
    (row,) = rows(out)
    assert float(row["d_hat"]) == pytest.approx(2.0, abs=1e-9)
    assert float(row["d_theory"]) == pytest.approx(0.5)


def test_exponent_insufficient_data(capsys, tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("snr_db,trials,outages\n10,1000,100\n20,1000,3\n")
    assert run(capsys, "exponent", "--probabilities", str(path))[0] == 3


def test_exponent_simulated_insufficient(capsys):
    code, _, err = run(capsys, "exponent", "--trials", "100", "--snr-db", "30,40")
    assert code == 3
    assert "insufficient" in err


def test_exponent_flat_siso_near_zero_rate(capsys):
    code, out, _ = run(capsys, "exponent", "--rates", "0.01", "--snr-db", "10,20,30",
                       "--trials", "200000", "--seed", "12345")
    assert code == 0
    (row,) = rows(out)
    assert abs(float(row["d_hat"]) - 1.0) <= 0.1


def test_exponent_two_tap_siso_near_zero_rate(capsys):
    code, out, _ = run(capsys, "exponent", "--pdp", "0.5,0.5", "--N", "2", "--rates", "0.01",
                       "--snr-db", "5,10,15,20", "--trials", "1000000", "--seed", "12345")
    assert code == 0
    (row,) = rows(out)
    assert abs(float(row["d_hat"]) - 2.0) <= 0.3


# --- criterion / pep --------------------------------------------------------------------------------

def test_criterion_fixture_passes(capsys, dd_book):
    code, out, err = run(capsys, "criterion", str(dd_book), "--pdp", "0.5,0.5")
    assert code == 0
    got = rows(out)
    assert len(got) == 6
    assert all(r["pass"] == "true" and r["rank"] == "2" for r in got)
    assert "verdict=PASS" in err


def test_criterion_flags_zero_difference(capsys, tmp_path):
    path = tmp_path / "z.txt"
    write_codebook(path, Codebook(np.array([[[1, 1]], [[1, 1]], [[0, 1]]], dtype=float)))
    code, out, err = run(capsys, "criterion", str(path), "--pdp", "0.5,0.5")
    assert code == 0
    got = rows(out)
    assert got[0]["rank"] == "0" and got[0]["pass"] == "false"
    assert "zero-difference pairs: [(0, 1)]" in err
    assert "verdict=FAIL" in err


def test_criterion_block_length_rejected(capsys, tmp_path):
    path = tmp_path / "short.txt"
    write_codebook(path, make_delay_diversity_codebook(AntennaConfig(2, 1), 2, 2))
    code, _, err = run(capsys, "criterion", str(path), "--pdp", "0.5,0.5", "--mt", "2")
    assert code == 2
    assert "N >= rho*m_t" in err


def test_criterion_malformed_file(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2 2\n1,0 1,0\n-1,0 oops\n")
    code, _, err = run(capsys, "criterion", str(path))
    assert code == 2
    assert "line 3" in err


def test_pep_union_bound(capsys, tmp_path):
    path = tmp_path / "b.txt"
    write_codebook(path, Codebook(np.array([[[0.0]], [[2.0]]])))
    code, out, _ = run(capsys, "pep", str(path), "--snr-db", "20", "--rates", "1")
    assert code == 0
    (row,) = rows(out)
    assert float(row["lambda"]) == pytest.approx(4.0)
    assert float(row["union_bound"]) == pytest.approx(100 * math.exp(-100), rel=1e-9)
    assert float(row["pep_sum"]) == pytest.approx(2 / 101)


def test_pep_pairs(capsys, dd_book):
    code, out, _ = run(capsys, "pep", str(dd_book), "--pdp", "0.5,0.5", "--snr-db", "10,20", "--pairs")
    assert code == 0
    got = rows(out)
    assert len(got) == 12
    assert all(0 < float(r["pep_bound"]) < 1 for r in got)
