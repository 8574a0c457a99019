import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ggexp.cli import main
from ggexp.expansion import CoefficientVector, TestFunction, forward_transform
from ggexp.quadrature import gen_gegenbauer_rule
from ggexp.special_poly import BasisParams, orthonormal_coefficient


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestEval:
    def test_orthonormal(self, capsys):
        code, out, _ = run(["eval", "--lambda", "1", "--mu", "0.5", "--n", "1", "--t", "0.25", "--orthonormal"], capsys)
        assert code == 0
        assert float(out) == pytest.approx(orthonormal_coefficient(BasisParams(1, 0.5), 1) * 0.25, rel=1e-15)

    def test_raw(self, capsys):
        code, out, _ = run(["eval", "--lambda", "1.5", "--mu", "0.5", "--n", "1", "--t", "0.5"], capsys)
        assert code == 0 and float(out) == pytest.approx(1.0)

    def test_out_of_domain(self, capsys):
        code, _, err = run(["eval", "--lambda", "1", "--mu", "0.5", "--n", "1", "--t", "1.5"], capsys)
        assert code == 2 and "[-1, 1]" in err

    def test_bad_params(self, capsys):
        code, _, err = run(["eval", "--lambda", "-0.7", "--mu", "0.5", "--n", "1", "--t", "0.5"], capsys)
        assert code == 2 and "lambda" in err

    def test_unknown_flag(self, capsys):
        code, _, _ = run(["eval", "--lambda", "1", "--mu", "0.5", "--n", "1", "--t", "0.5", "--bogus"], capsys)
        assert code == 2


class TestQuad:
    def test_csv_file(self, tmp_path, capsys):
        out = tmp_path / "rule.csv"
        code, _, _ = run(["quad", "--lambda", "1.5", "--mu", "0.5", "--points", "5", "--out", str(out)], capsys)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "node,weight"
        rule = gen_gegenbauer_rule(BasisParams(1.5, 0.5), 5)
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        np.testing.assert_array_equal(data[:, 0], rule.nodes)
        np.testing.assert_array_equal(data[:, 1], rule.weights)

    def test_unwritable(self, tmp_path, capsys):
        code, _, err = run(
            ["quad", "--lambda", "1", "--mu", "1", "--points", "3", "--out", str(tmp_path / "missing" / "r.csv")], capsys
        )
        assert code == 2 and "cannot write" in err

    def test_bad_points(self, capsys):
        code, _, _ = run(["quad", "--lambda", "1", "--mu", "1", "--points", "0"], capsys)
        assert code == 2


class TestTransform:
    def test_monomial_csv(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        src.write_text("n,monomial\n0,1\n2,3\n1,-2\n")
        out = tmp_path / "c.json"
        code, _, _ = run(["transform", "--lambda", "0.5", "--mu", "0", "--degree", "4", "--input", str(src), "--out", str(out)], capsys)
        assert code == 0
        cv = CoefficientVector.from_json(out.read_text())
        bp = BasisParams(0.5, 0.0)
        f = TestFunction.from_callable(lambda t: 1 - 2 * t + 3 * t * t, degree=2)
        np.testing.assert_allclose(cv.coeffs, forward_transform(bp, f, 4).coeffs, atol=1e-14)

    def test_orthonormal_json_round_trip(self, tmp_path, capsys):
        src = tmp_path / "p.json"
        src.write_text(json.dumps({"basis": "orthonormal", "coeffs": [0.5, 0, -1.25]}))
        code, out, _ = run(["transform", "--lambda", "1", "--mu", "1", "--degree", "3", "--input", str(src)], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,coefficient"
        vals = [float(ln.split(",")[1]) for ln in lines[1:]]
        np.testing.assert_allclose(vals, [0.5, 0, -1.25, 0], atol=1e-13)

    def test_samples_from_quad(self, tmp_path, capsys):
        rule_file = tmp_path / "rule.csv"
        assert main(["quad", "--lambda", "1.5", "--mu", "0.5", "--points", "8", "--out", str(rule_file)]) == 0
        nodes = np.array([float(ln.split(",")[0]) for ln in rule_file.read_text().splitlines()[1:]])
        samples = tmp_path / "s.csv"
        samples.write_text("node,value\n" + "".join(f"{x:.17g},{x**3 - x:.17g}\n" for x in nodes))
        code, out, _ = run(["transform", "--lambda", "1.5", "--mu", "0.5", "--degree", "5", "--input", str(samples)], capsys)
        assert code == 0
        vals = np.array([float(ln.split(",")[1]) for ln in out.splitlines()[1:]])
        f = TestFunction.from_callable(lambda t: t**3 - t, degree=3)
        np.testing.assert_allclose(vals, forward_transform(BasisParams(1.5, 0.5), f, 5).coeffs, atol=1e-13)

    def test_family(self, capsys):
        argv = ["transform", "--lambda", "1", "--mu", "0.5", "--degree", "6", "--input", "family:flat", "--seed", "3"]
        code, first, _ = run(argv, capsys)
        _, second, _ = run(argv, capsys)
        assert code == 0 and first == second

    @pytest.mark.parametrize("content", ["x,y\n1,2\n", "n,monomial\n0,abc\n"])
    def test_bad_file(self, tmp_path, capsys, content):
        src = tmp_path / "bad.csv"
        src.write_text(content)
        code, _, _ = run(["transform", "--lambda", "1", "--mu", "1", "--degree", "2", "--input", str(src)], capsys)
        assert code == 2

    def test_missing_input(self, capsys):
        code, _, _ = run(["transform", "--lambda", "1", "--mu", "1", "--degree", "2", "--input", "nope.csv"], capsys)
        assert code == 2

    def test_samples_wrong_nodes(self, tmp_path, capsys):
        src = tmp_path / "s.csv"
        src.write_text("node,value\n-0.5,1\n0.5,1\n")
        code, _, err = run(["transform", "--lambda", "1", "--mu", "1", "--degree", "1", "--input", str(src)], capsys)
        assert code == 2 and "nodes" in err


def verify(check, tmp_path, *extra, name=None):
    out = tmp_path / f"{name or check}.json"
    code = main(["verify", check, *extra, "--out", str(out)])
    return code, out


class TestVerify:
    def test_parseval_example(self, tmp_path, capsys):
        code, out = verify("parseval", tmp_path, "--lambda", "0.5", "--mu", "0", "--nmax", "20", "--trials", "50", "--seed", "0")
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == 1
        assert doc["payload"]["pass"] is True
        assert doc["payload"]["config"]["options"]["seed"] == 0
        rows = out.with_suffix(".csv").read_text().splitlines()
        assert rows[0] == "x,ratio" and len(rows) == 51
        assert all(abs(float(r.split(",")[1]) - 1) < 1e-8 for r in rows[1:])

    def test_connection_mu_zero(self, capsys):
        code, _, err = run(["verify", "connection", "--lambda", "1.5", "--mu", "0"], capsys)
        assert code == 2 and "mu > 0" in err

    def test_payload_reproducible(self, tmp_path, capsys):
        args = ["--lambda", "1.5", "--mu", "0.5", "--nmax", "16", "--trials", "6"]
        _, a = verify("hausdorff-young", tmp_path, *args, name="a")
        doc_a = json.loads(a.read_text())
        b = tmp_path / "a.json"
        os.replace(a, tmp_path / "first.json")
        assert main(["verify", "hausdorff-young", *args, "--out", str(b)]) == 0
        doc_b = json.loads(b.read_text())
        assert doc_a["payload"] == doc_b["payload"]
        assert doc_a["payload_sha256"] == doc_b["payload_sha256"]
        first = (tmp_path / "first.json").read_text().replace(doc_a["generated_at"], "")
        assert first == b.read_text().replace(doc_b["generated_at"], "")

    def test_failure_exit_code(self, tmp_path, capsys):
        # the slope part of the sup-norm check does not hold at (3, 1) over 16..64
        code, out = verify("supnorm", tmp_path, "--lambda", "3", "--mu", "1", "--nmax", "64")
        assert code == 1
        assert json.loads(out.read_text())["payload"]["pass"] is False

    def test_supnorm_mu_zero_not_asserted(self, tmp_path, capsys):
        code, out = verify("supnorm", tmp_path, "--lambda", "3", "--mu", "0", "--nmax", "40")
        assert code == 0
        assert json.loads(out.read_text())["payload"]["result"]["asserted"] is False

    def test_numerical_error_exit_code(self, tmp_path, capsys, monkeypatch):
        import ggexp.verify as vf
        from ggexp import ConvergenceError

        def boom(*a, **k):
            raise ConvergenceError(0.0, 1.0, 65536)

        monkeypatch.setattr(vf, "check_parseval", boom)
        code, _, err = run(["verify", "parseval", "--lambda", "1", "--mu", "1"], capsys)
        assert code == 3 and "65536" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ["verify", "unified", "--lambda", "1", "--mu", "1", "--p", "2.5"],
            ["verify", "unified", "--lambda", "1", "--mu", "1", "--p", "1.5", "--s", "5"],
            ["verify", "converse", "--lambda", "1", "--mu", "1", "--q", "1.5"],
            ["verify", "converse", "--lambda", "1", "--mu", "1", "--theorem", "UNIFIED", "--q", "3", "--r", "9"],
            ["verify", "parseval", "--lambda", "1", "--mu", "1", "--trials", "0"],
            ["verify", "supnorm", "--lambda", "1", "--mu", "1", "--nmax", "10", "--nmin", "20"],
            ["verify", "nonsense", "--lambda", "1", "--mu", "1"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        assert run(argv, capsys)[0] == 2

    def test_help_documents_headers(self, capsys):
        with pytest.raises(SystemExit):
            from ggexp.cli import _parser

            _parser().parse_args(["--help"])
        out = capsys.readouterr().out
        for header in ("node,weight", "n,coefficient", "x,ratio"):
            assert header in out


def test_console_script_threads(tmp_path):
    env = dict(os.environ, GGEXP_THREADS="2")
    out = tmp_path / "c.json"
    proc = subprocess.run(
        [sys.executable, "-m", "ggexp.cli", "verify", "connection", "--lambda", "0", "--mu", "1", "--out", str(out)],
        env=env, capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["payload"]["pass"] is True
