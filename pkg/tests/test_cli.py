import json
import math

import pytest

from radialeig.cli import main

PI2 = math.pi ** 2


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def test_spectrum_pucci(tmp_path, capsys):
    code, out = run(tmp_path, "spectrum", "--op", "pucci+", "--lam", "1", "--Lam", "2",
                    "--interval", "0", "1", "--n-max", "2")
    assert code == 0
    doc = json.loads((out / "results.json").read_text())
    assert doc["schema_version"] == 1
    vals = {(e["n"], e["sign"]): e["lambda"] for e in doc["results"]}
    assert vals[(0, 1)] == pytest.approx(PI2, rel=1e-9)
    assert vals[(0, -1)] == pytest.approx(2 * PI2, rel=1e-9)
    assert vals[(1, 1)] == pytest.approx(PI2 * (1 + math.sqrt(2)) ** 2, rel=1e-7)
    assert (out / "eig_+1.csv").exists() and (out / "eig_-2.csv").exists()
    text = capsys.readouterr().out
    assert "9.8696" in text and "19.7392" in text and "57.5242" in text


def test_bad_operator_file_exits_3(tmp_path, capsys):
    op = tmp_path / "bad_lambda0.op"
    op.write_text('kind = "pucci_plus"\nlambda_min = 0.0\nlambda_max = 2.0\n')
    code, _ = run(tmp_path, "check-operator", "--op-file", str(op))
    assert code == 3
    assert "(F2)" in capsys.readouterr().err


def test_radial_spectrum_laplacian(tmp_path):
    code, out = run(tmp_path, "radial-spectrum", "--op", "linear", "--dim", "3", "--R", "1",
                    "--n-max", "1")
    assert code == 0
    doc = json.loads((out / "results.json").read_text())
    pairs = {(e["n"], e["sign"]): e for e in doc["results"]}
    assert pairs[(0, 1)]["lambda"] == pytest.approx(PI2, rel=1e-7)
    assert pairs[(1, 1)]["lambda"] == pytest.approx(4 * PI2, rel=1e-7)
    assert pairs[(1, 1)]["nodes"][0] == pytest.approx(0.5, abs=1e-7)


def test_determinism(tmp_path):
    argv = ["semi-eig", "--op", "pucci-", "--lam", "1", "--Lam", "3", "--grad", "0.2",
            "--interval", "0", "2", "--seed", "4"]
    a = main(argv + ["--out", str(tmp_path / "a")])
    b = main(argv + ["--out", str(tmp_path / "b")])
    assert a == b == 0
    assert (tmp_path / "a" / "results.json").read_bytes() == \
        (tmp_path / "b" / "results.json").read_bytes()


def test_dirichlet_interval(tmp_path):
    code, out = run(tmp_path, "dirichlet", "--op", "linear", "--interval", "0", "1",
                    "--f", "-1", "--kappa", "1")
    assert code == 0
    doc = json.loads((out / "results.json").read_text())
    assert doc["solution"]["abp"]["passed"]


def test_dirichlet_ball(tmp_path):
    code, out = run(tmp_path, "dirichlet", "--op", "pucci+", "--lam", "1", "--Lam", "2",
                    "--dim", "2", "--R", "1")
    assert code == 0


def test_semi_eig_both_methods(tmp_path):
    code, out = run(tmp_path, "semi-eig", "--op", "pucci+", "--lam", "1", "--Lam", "2",
                    "--interval", "0", "1", "--method", "both")
    assert code == 0


def test_abp_audit(tmp_path):
    code, out = run(tmp_path, "abp-audit", "--op", "pucci+", "--lam", "1", "--Lam", "2",
                    "--interval", "0", "1")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["spectrum", "--op", "linear", "--interval", "1", "0"],
    ["spectrum", "--op", "linear", "--interval", "0", "1", "--bogus"],
    ["spectrum", "--op", "linear", "--interval", "0", "1", "--n-max", "-1"],
    ["frobnicate"],
])
def test_configuration_errors_exit_1(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == 1


def test_concave_operator_is_admissible(tmp_path):
    code, _ = run(tmp_path, "check-operator", "--op", "pucci-", "--lam", "1", "--Lam", "2")
    assert code == 0
