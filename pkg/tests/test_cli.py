import csv
import io
import json
import subprocess
import sys

import pytest

from lckverify.cli import load_config_file, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_hopf_json(capsys):
    code, out, _ = run(["verify", "--model", "hopf", "--n", "2", "--a", "2.0", "--samples", "64",
                        "--seed", "42", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["overall_pass"]
    assert rep["model"] == {"model": "hopf", "n": 2, "a": 2.0}
    assert rep["engine"] == "ad" and rep["seed"] == 42 and rep["samples"] == 64
    first = rep["checks"][0]
    assert list(first)[:7] == ["id", "paper_anchor", "max_residual", "mean_residual", "tolerance", "pass", "witness"]


def test_verify_flat(capsys):
    code, out, _ = run(["verify", "--model", "flat", "--n", "2", "--samples", "32"], capsys)
    assert code == 0
    assert max(c["max_residual"] for c in json.loads(out)["checks"]) <= 1e-12


def test_verify_deformed_expected_failures(capsys):
    code, out, _ = run(["verify", "--model", "hopf-deformed", "--n", "2", "--samples", "32"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert set(rep["expected_failures"]) == {"id_vaisman", "id_gauduchon", "id_potential", "id_killing_T"}


def test_verify_failure_exit_1(tmp_path, capsys):
    tol = tmp_path / "tol.txt"
    tol.write_text("id_lck = 1e-40\n")
    code, _, _ = run(["verify", "--model", "hopf", "--samples", "8", "--tol-overrides", str(tol)], capsys)
    assert code == 1


def test_config_errors_exit_2(tmp_path, capsys):
    assert run(["verify", "--model", "hopf", "--n", "1"], capsys)[0] == 2
    assert run(["verify", "--model", "nope"], capsys)[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, err = run(["verify", "--config", str(bad)], capsys)
    assert code == 2 and "unknown key" in err
    tol = tmp_path / "tol.txt"
    tol.write_text("id_zzz = 1e-3\n")
    assert run(["verify", "--tol-overrides", str(tol)], capsys)[0] == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmodel = hopf-deformed\nsamples = 16\nseed = 3\nformat = csv\ntol.id_naj = 1e-8\n")
    assert load_config_file(cfg)["tolerances"] == {"id_naj": 1e-8}
    code, out, _ = run(["verify", "--config", str(cfg), "--seed", "4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    naj = next(r for r in rows if r["id"] == "id_naj")
    assert float(naj["tolerance"]) == 1e-8
    assert next(r for r in rows if r["id"] == "id_vaisman")["expected_failure"] == "true"


def test_out_file_and_text(tmp_path, capsys):
    path = tmp_path / "r.txt"
    code, out, _ = run(["verify", "--model", "hopf", "--samples", "8", "--format", "text", "--out", str(path)],
                       capsys)
    assert code == 0 and out == ""
    assert path.read_text().strip().endswith("overall: PASS")


def test_integrate_div_lee(capsys):
    code, out, _ = run(["integrate", "--model", "hopf-deformed", "--quantity", "div-lee",
                        "--grid-r", "16", "--grid-ang", "8"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["checks"][0]["id"] == "int_div_lee" and rep["checks"][0]["pass"]


def test_integrate_errors(capsys):
    assert run(["integrate", "--model", "hopf", "--n", "3"], capsys)[0] == 2
    assert run(["integrate", "--model", "hopf-deformed", "--quantity", "nabla-lee-sq",
                "--grid-r", "2", "--grid-ang", "2"], capsys)[0] == 2


def test_list_checks(capsys):
    code, out, _ = run(["list-checks"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and any(l.startswith("id_naj") for l in lines)
    assert all(len(l.split(None, 1)) == 2 for l in lines)


def test_selftest(capsys):
    code, out, _ = run(["selftest"], capsys)
    assert code == 0 and "FAIL" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lckverify", "list-checks"], capture_output=True, text=True)
    assert proc.returncode == 0 and "id_cinci" in proc.stdout
