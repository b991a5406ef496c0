import csv
import json

import numpy as np
import pytest

from wavegalerkin import AnalysisOptions, ConvergenceError, analyze, builtin, save_filter, verify, write_report
from wavegalerkin import cli
from wavegalerkin._validation import parse_complex
from wavegalerkin.exceptions import ValidationError
from wavegalerkin.report import ANNOTATIONS, to_jsonable

FAST = AnalysisOptions(grid=512, per_range=128, lp_trials=30)


@pytest.fixture(scope="module")
def haar_report():
    return analyze(builtin("haar"), FAST)


@pytest.fixture(scope="module")
def stretched_report():
    return analyze(builtin("stretched-haar"), FAST)


def values(report):
    return [complex(*e["value"]) for e in report.sections["transition"]["eigenpairs"]]


def test_haar_report(haar_report):
    s = haar_report.sections
    assert haar_report.verdict == "orthonormal-translates"
    assert [(e["value"], e["multiplicity"]) for e in s["peripheral_prediction"]["eigenvalues"]] == [([1.0, 0.0], 1)]
    np.testing.assert_allclose(sorted(v.real for v in values(haar_report)), [0.5, 0.5, 1.0], atol=1e-10)
    assert s["qmf"]["satisfied"] and s["cross_check"]["consistent"]
    assert s["peripheral_eigenfunctions"][0]["residuals"][0] < 1e-3


def test_stretched_haar_report(stretched_report):
    s = stretched_report.sections
    assert stretched_report.verdict == "not-orthonormal"
    pred = {complex(*e["value"]): e["multiplicity"] for e in s["peripheral_prediction"]["eigenvalues"]}
    assert pred == {1: 2, -1: 1}
    assert all(m["observed"] == m["predicted"] for m in s["cross_check"]["matched"])


def test_daubechies_report():
    rep = analyze(builtin("daubechies4"), FAST)
    assert rep.verdict == "orthonormal-translates"


def test_report_json_shape(stretched_report):
    d = json.loads(stretched_report.to_json())
    assert d["schema"] == 1
    assert "timings" not in d
    e = d["transition"]["eigenpairs"][0]["value"]
    assert isinstance(e, list) and len(e) == 2
    assert d["annotations"] == ANNOTATIONS
    assert d["interior_eigenfunction"]["cycle"]["period"] >= 2
    assert "timings" in stretched_report.to_dict(timings=True)


def test_annotations_name_unreproduced_claims(haar_report):
    text = " ".join(haar_report.sections["annotations"])
    assert "closed unit disk" in text
    assert "N^(1/p)" in text and "no explicit construction" in text
    assert "Lipschitz" in text


def test_skipped_section_when_no_kernel_cycle():
    rep = analyze(builtin("haar"), AnalysisOptions(grid=256, per_range=64, lp_trials=5, max_period=1))
    sec = rep.sections["interior_eigenfunction"]
    assert sec["status"] == "skipped"
    assert "kernel" in sec["reason"]
    assert rep.verdict == "orthonormal-translates"


def test_write_report(tmp_path, haar_report):
    paths = write_report(haar_report, tmp_path)
    names = {p.name for p in paths}
    assert {"report.json", "eigenvalues.csv", "cycles.csv", "manifest.json"} <= names
    with open(tmp_path / "eigenvalues.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    manifest = json.loads((tmp_path / "eigenfunctions" / "manifest.json").read_text())
    for item in manifest:
        with open(tmp_path / "eigenfunctions" / item["file"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["theta", "re", "im"] and len(rows) == 513


def test_to_jsonable():
    from fractions import Fraction

    out = to_jsonable({"a": 1 + 2j, "b": np.float64(np.nan), "c": Fraction(1, 3), 3: np.arange(2)})
    assert out == {"a": [1.0, 2.0], "b": None, "c": "1/3", "3": [0, 1]}


def test_verify_passes_on_haar():
    checks = verify(builtin("haar"), FAST)
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]
    assert len(checks) > 20


def test_verify_fails_for_non_qmf_filter():
    from wavegalerkin import Filter

    f = Filter(np.ones(3)).normalize()
    with pytest.warns(RuntimeWarning):
        checks = verify(f, AnalysisOptions(grid=256, per_range=64, lp_trials=5))
    failed = {c.name for c in checks if not c.passed}
    assert "qmf residual" in failed


@pytest.mark.parametrize(
    "text, value",
    [("-1+0i", -1), ("0.5", 0.5), ("i", 1j), ("-i", -1j), ("2i", 2j), ("0.4-0.3j", 0.4 - 0.3j), ("1e-3+2e-1i", 0.001 + 0.2j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+2", "1++2i"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValidationError):
        parse_complex(text)


def test_cli_analyze(tmp_path, capsys):
    path = tmp_path / "haar.json"
    save_filter(builtin("haar"), path)
    out = tmp_path / "out"
    code = cli.main(["analyze", str(path), "--out", str(out), "--grid", "512", "--per-range", "128"])
    assert code == 0
    assert (out / "report.json").exists()
    assert "orthonormal-translates" in capsys.readouterr().out


def test_cli_peripheral_eigenfunction(tmp_path, capsys):
    path = tmp_path / "sh.json"
    save_filter(builtin("stretched-haar"), path)
    csv_path = tmp_path / "g.csv"
    assert cli.main(["eigenfunction", str(path), "--lambda", "-1+0i", "--out", str(csv_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["kind"] == "peripheral" and summary["residual"] < 1e-3
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    assert data.shape == (1024, 3)


def test_cli_interior_eigenfunction(tmp_path, capsys):
    code = cli.main(["eigenfunction", "haar", "--lambda", "0.5", "--cycle-period", "3", "--out", str(tmp_path / "h.csv")])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["kind"] == "h-series" and summary["residual"] < 1e-8
    assert len(summary["cycle"]) == 3


def test_cli_rejects_lambda_outside_disk(capsys):
    assert cli.main(["eigenfunction", "haar", "--lambda", "2+0i"]) == 1
    assert "outside C(T) spectrum disk |λ|≤1" in capsys.readouterr().err


def test_cli_unit_lambda_without_cycle(tmp_path, capsys):
    assert cli.main(["eigenfunction", "haar", "--lambda", "i"]) == 1
    assert "not a continuous eigenvalue" in capsys.readouterr().err
    out = tmp_path / "h.csv"
    assert cli.main(["eigenfunction", "haar", "--lambda", "i", "--linf", "--per-range", "64", "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["residual"] < 1e-2


def test_cli_bad_cycle_period(capsys):
    assert cli.main(["eigenfunction", "stretched-haar", "--lambda", "-1", "--cycle-period", "5"]) == 1
    assert "periods available" in capsys.readouterr().err


def test_cli_cycles(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["cycles", "stretched-haar", "--max-period", "3", "--m0-only", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "1/3 2/3" in text and "1/7" not in text
    with open(out) as fh:
        assert len(list(csv.reader(fh))) == 3


def test_cli_norm_demo(capsys):
    assert cli.main(["norm-demo", "haar", "--p", "2", "--epsilon", "0.01", "--trials", "30"]) == 0
    text = capsys.readouterr().out
    assert "within bound: True" in text and "subspace probe" in text


def test_cli_norm_demo_bad_epsilon(capsys):
    assert cli.main(["norm-demo", "haar", "--p", "2", "--epsilon", "-1"]) == 1


def test_cli_verify_writes_deterministic_json(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "haar", "--grid", "512", "--per-range", "128", "--seed", "0"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["passed"] is True


def test_cli_validation_exit_codes(tmp_path, capsys):
    assert cli.main(["analyze", str(tmp_path / "missing.json")]) == 1
    assert "no such filter file" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scale": 1, "coefficients": [[1, 0]]}))
    assert cli.main(["cycles", str(bad)]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["analyze"])
    assert exc.value.code == 1


def test_cli_convergence_exit_code(monkeypatch, capsys):
    def fail(*args, **kwargs):
        raise ConvergenceError("tail not decreasing")

    monkeypatch.setattr(cli, "peripheral_basis", fail)
    assert cli.main(["eigenfunction", "haar", "--lambda", "1"]) == 2
    assert "tail not decreasing" in capsys.readouterr().err
