import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from armlin.cli import SpecError, main, parse_decorations, parse_problem
from armlin.linearizer import conjugacy_residual
from armlin.series import SeriesTuple

from matrix import MATRIX

DATA = Path(__file__).parent / "data"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_linearize_both_q2(capsys, tmp_path):
    out = tmp_path / "h.json"
    code, _, _ = run(["linearize", DATA / "q2_rational.json", "--method", "both", "--out", out], capsys)
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["discrepancy"] == 0
    h = SeriesTuple.from_json(obj["results"]["tree"]["h"])
    assert {m[0]: c for m, c in h[0].terms.items()}[3] == pytest.approx(2 / 3)
    assert obj["results"]["tree"]["h"] == obj["results"]["recursive"]["h"]


def test_linearize_stdout_and_method(capsys):
    code, out, _ = run(["linearize", DATA / "lambda1_field.json", "--method", "tree"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert list(obj["results"]) == ["tree"] and "discrepancy" not in obj


def test_linearize_zero_a_is_identity(capsys):
    code, out, _ = run(["linearize", DATA / "zero_a.json"], capsys)
    assert code == 0
    obj = json.loads(out)
    h = SeriesTuple.from_json(obj["results"]["tree"]["h"])
    assert h == SeriesTuple.identity(h.dimension, h.cap)


def test_resonance_exit_code(capsys):
    code, _, err = run(["linearize", DATA / "resonant_q24.json"], capsys)
    assert code == 3
    assert "resonan" in err


def test_parse_error_exit_code(capsys, tmp_path):
    code, _, err = run(["linearize", DATA / "malformed.json"], capsys)
    assert code == 2
    assert "line" in err
    bad = tmp_path / "bad.json"
    obj = dict(MATRIX["q2"], nonlinear=[{"component": 1, "exponent": [1], "coeff": ["1", "0"]}])
    bad.write_text(json.dumps(obj))
    code, _, err = run(["linearize", bad], capsys)
    assert code == 2 and "nonlinear[0].exponent" in err
    code, _, err = run(["linearize", tmp_path / "missing.json"], capsys)
    assert code == 2


@pytest.mark.parametrize("mutate,field", [
    (lambda o: o.pop("kind"), "kind"),
    (lambda o: o.update(dimension=0), "dimension"),
    (lambda o: o.update(spectrum=[]), "spectrum"),
    (lambda o: o.update(mode="symbolic"), "mode"),
    (lambda o: o.update(nonlinear=[{"component": 3, "exponent": [2], "coeff": ["1", "0"]}]), "component"),
    (lambda o: o.update(spectrum=[["x", "0"]]), "spectrum[0]"),
])
def test_parse_problem_messages(mutate, field):
    obj = json.loads(json.dumps(MATRIX["q2"]))
    mutate(obj)
    with pytest.raises(SpecError, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_problem(obj)


def test_bruno_with_csv_and_radius(capsys, tmp_path):
    out, table = tmp_path / "b.json", tmp_path / "b.csv"
    code, _, _ = run(["bruno", DATA / "q2_rational.json", "--kmax", 50, "--csv", table, "--b", 1, "--M", 1, "--out", out], capsys)
    assert code == 0
    obj = json.loads(out.read_text())
    assert len(obj["omega"]) == 50
    assert obj["radius"]["radius_lower_bound"] == pytest.approx(1 / (6 * obj["B"]), rel=1e-12)
    assert obj["radius"]["M_source"] == "supplied"
    rows = list(csv.reader(table.open()))
    assert rows[0][0] == "k" and len(rows) == 51


def test_bruno_default_M(capsys):
    code, out, _ = run(["bruno", DATA / "q23_rational.json", "--kmax", 10, "--b", 0.5], capsys)
    obj = json.loads(out)
    assert code == 0
    assert obj["radius"]["M_source"] == "coefficient-sum bound"
    code, out, _ = run(["bruno", DATA / "q23_rational.json", "--kmax", 10], capsys)
    assert json.loads(out)["radius"] is None


def test_verify_all_passes(capsys):
    code, out, _ = run(["verify", DATA / "q23_rational.json", "--weight", 3], capsys)
    assert code == 0
    assert out.count("PASS") == 10 and "FAIL" not in out


def test_verify_counting_golden(capsys):
    code, out, _ = run(["verify", DATA / "golden_field_float.json", "--checks", "counting"], capsys)
    assert code == 0 and "counting" in out and "PASS" in out


def test_verify_corrupted_h(capsys, tmp_path):
    h_path = tmp_path / "h.json"
    assert main(["linearize", str(DATA / "q2_rational.json"), "--out", str(h_path)]) == 0
    obj = json.loads(h_path.read_text())
    terms = obj["results"]["tree"]["h"][0]["terms"]
    terms[-1]["re"] = "7/5"
    h_path.write_text(json.dumps(obj))
    capsys.readouterr()
    code, out, _ = run(["verify", DATA / "q2_rational.json", "--checks", "residual,majorant", "--result", h_path], capsys)
    assert code == 4
    line = [l for l in out.splitlines() if l.startswith("residual")][0]
    assert "FAIL" in line


def test_verify_unknown_check(capsys):
    code, _, err = run(["verify", DATA / "q2_rational.json", "--checks", "nonsense"], capsys)
    assert code == 2 and "nonsense" in err


def test_verify_threads(capsys, monkeypatch):
    monkeypatch.setenv("ARMLIN_THREADS", "2")
    code, out, _ = run(["verify", DATA / "q2_rational.json", "--checks", "oracle,residual,counting"], capsys)
    assert code == 0 and out.count("PASS") == 3


def test_forests_examples(capsys):
    code, out, _ = run(["forests", "--dim", 1, "--decorations", "(1)", "--weight", 2, "--count-only"], capsys)
    assert code == 0 and out.strip() == "4"
    code, out, _ = run(["forests", "--dim", 1, "--decorations", "(1)", "--weight", 0], capsys)
    assert out.strip() == "{}"
    decs = "(1,0);(-1,2);(2,-1);(0,1)"
    _, every, _ = run(["forests", "--dim", 2, "--decorations", decs, "--weight", 4], capsys)
    _, fplus, _ = run(["forests", "--dim", 2, "--decorations", decs, "--weight", 4, "--filter", "fplus"], capsys)
    assert set(fplus.split()) <= set(every.split())
    assert len(fplus.split()) < len(every.split())


def test_forests_decorations_file(capsys, tmp_path):
    f = tmp_path / "decs.txt"
    f.write_text("(1,0)\n(0,1)\n")
    code, out, _ = run(["forests", "--dim", 2, "--decorations", f, "--weight", 2, "--count-only"], capsys)
    # ∅, two leaves, four bamboos, three products of two leaves
    assert code == 0 and out.strip() == "10"
    code, _, err = run(["forests", "--dim", 2, "--decorations", "(1,-1)", "--weight", 2], capsys)
    assert code == 2


def test_parse_decorations():
    assert parse_decorations("1 2", 1) == [(1,), (2,)]
    assert parse_decorations("[2,-1];(0,1)", 2) == [(2, -1), (0, 1)]
    with pytest.raises(SpecError):
        parse_decorations("(1,0,0)", 2)


def test_deterministic_output(capsys):
    outs = [run(["linearize", DATA / "q23_rational.json"], capsys)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    obj = json.loads(outs[0])
    assert json.dumps(obj, sort_keys=True, indent=2) + "\n" == outs[0]


@pytest.mark.parametrize("name", ["q23", "lambda_golden", "q_gaussian"])
def test_roundtrip_residual(name, capsys, tmp_path):
    src, out = tmp_path / "spec.json", tmp_path / "h.json"
    src.write_text(json.dumps(MATRIX[name]))
    assert main(["linearize", str(src), "--out", str(out)]) == 0
    spec, mode = parse_problem(MATRIX[name])
    h = SeriesTuple.from_json(json.loads(out.read_text())["results"]["tree"]["h"])
    r = conjugacy_residual(spec, h)
    assert r == 0 if mode == "rational" else r <= 1e-9 * (1 + max(c.max_abs() for c in h))
    capsys.readouterr()
    code, out_text, _ = run(["verify", src, "--checks", "residual", "--result", out], capsys)
    assert code == 0


@pytest.mark.skipif(shutil.which("armlin") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["armlin", "forests", "--dim", "1", "--decorations", "(1)", "--weight", "3", "--count-only"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "8"
    proc = subprocess.run([sys.executable, "-m", "armlin.cli", "linearize", str(DATA / "resonant_q24.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 3
