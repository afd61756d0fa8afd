import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from entroscope.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


class TestEntropy:
    def test_fair_coin_seeds(self, capsys):
        code, out, _ = run(capsys, "entropy", "--source", "fair-coin", "--n", "20000", "--seeds", "2")
        assert code == 0
        assert "# source=fair-coin" in out and "# generator=numpy Philox" in out
        table = rows(out)
        assert [r["n"] for r in table] == ["10", "100", "1000", "10000", "20000"] * 2
        assert [r["seed"] for r in table[::5]] == ["0", "1"]
        assert float(table[-1]["abs_error"]) <= 0.02

    def test_input_file(self, capsys, tmp_path):
        f = tmp_path / "data.txt"
        f.write_text("0 1 2 3\n3 2 1 0\n")
        code, out, _ = run(capsys, "entropy", "--input", str(f), "--alphabet", "4")
        assert code == 0
        assert all(r["analytic_nats"] == "" and r["seed"] == "" for r in rows(out))

    def test_ar1(self, capsys):
        code, out, _ = run(capsys, "entropy", "--source", "ar1:rho=0.5", "--reference", "gaussian", "--n", "10000")
        assert code == 0
        assert abs(float(rows(out)[-1]["estimate_nats"]) + 0.14384) <= 0.05

    def test_real_input_and_lebesgue(self, capsys, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("\n".join(str(v) for v in np.random.default_rng(0).standard_normal(200)) + "\n")
        code, out, _ = run(capsys, "entropy", "--input", str(f), "--reference", "gaussian", "--lebesgue")
        assert code == 0 and float(rows(out)[-1]["estimate_nats"]) > 0

    def test_byte_identical(self, capsys):
        a = run(capsys, "entropy", "--source", "markov:rows=0.9,0.1;0.2,0.8", "--n", "3000", "--seed", "5")[1]
        b = run(capsys, "entropy", "--source", "markov:rows=0.9,0.1;0.2,0.8", "--n", "3000", "--seed", "5")[1]
        assert a == b


class TestErrors:
    def test_source_and_input(self, capsys, tmp_path):
        code, _, err = run(capsys, "entropy", "--n", "10")
        assert code == 2 and "exactly one" in err
        f = tmp_path / "d.txt"
        f.write_text("0\n")
        assert run(capsys, "entropy", "--source", "fair-coin", "--input", str(f), "--n", "5")[0] == 2

    def test_bad_source(self, capsys):
        assert run(capsys, "entropy", "--source", "zipf", "--n", "10")[0] == 2

    def test_parse_error_line_number(self, capsys, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("0 1\n1 0\n0 x\n")
        code, _, err = run(capsys, "entropy", "--input", str(f), "--alphabet", "2")
        assert code == 3 and "line 3" in err

    def test_symbol_outside_alphabet(self, capsys, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("0 1\n5\n")
        code, _, err = run(capsys, "predict", "--input", str(f), "--alphabet", "2")
        assert code == 3 and "line 2" in err

    def test_bad_rmax(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["density", "--source", "uniform", "--rmax", "zero"])
        assert exc.value.code == 2

    def test_diagnostic_needs_conditionals(self, capsys):
        assert run(capsys, "diagnostic", "--source", "ar1:rho=0.5")[0] == 2

    def test_predict_needs_finite(self, capsys):
        assert run(capsys, "predict", "--source", "uniform", "--n", "10")[0] == 2


class TestOtherCommands:
    def test_density_empty_history(self, capsys):
        code, out, _ = run(capsys, "density", "--source", "uniform", "--n", "0", "--rmax", "3", "--grid", "8")
        assert code == 0
        np.testing.assert_allclose([float(r["predictive_density"]) for r in rows(out)], 0.8, rtol=1e-10)

    def test_density_uniform_band(self, capsys):
        code, out, _ = run(capsys, "density", "--source", "uniform", "--n", "10000")
        d = [float(r["predictive_density"]) for r in rows(out)]
        assert len(d) == 64 and min(d) >= 0.8 and max(d) <= 1.25

    def test_density_gaussian_positive(self, capsys):
        code, out, _ = run(capsys, "density", "--source", "ar1:rho=0.5", "--reference", "gaussian", "--n", "2000")
        assert code == 0 and all(float(r["predictive_density"]) > 0 for r in rows(out))

    def test_predict(self, capsys):
        code, out, _ = run(capsys, "predict", "--source", "constant", "--n", "5000", "--max-terms", "16")
        table = rows(out)
        assert code == 0 and float(table[-1]["mistake_density"]) <= 0.01 and table[-1]["bayes_density"] == "0"

    def test_diagnostic(self, capsys):
        code, out, _ = run(capsys, "diagnostic", "--source", "fair-coin", "--n", "1000", "--replicas", "4")
        table = rows(out)
        assert code == 0 and [r["n"] for r in table] == ["100", "1000"] and table[0]["replicas"] == "4"

    def test_sample_roundtrip(self, capsys, tmp_path):
        out = tmp_path / "s.txt"
        assert run(capsys, "sample", "--source", "periodic:01", "--n", "5", "--out", str(out))[0] == 0
        assert out.read_text().split() == ["0", "1", "0", "1", "0"]
        code, text, _ = run(capsys, "entropy", "--input", str(out), "--alphabet", "2")
        assert code == 0

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "entroscope", "sample", "--source", "fair-coin", "--n", "3"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and len(proc.stdout.split()) == 3
