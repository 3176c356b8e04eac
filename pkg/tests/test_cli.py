import json
import math

import pytest

from mimostab.cli import EXIT_ANALYSIS, EXIT_MISMATCH, EXIT_PARSE, main
from mimostab.suite import corpus_dir, load_corpus_system
from mimostab.systems import parse_system, system_to_dict

CORPUS = corpus_dir()


def test_parse_minimal_scalar(tmp_path):
    f = tmp_path / "lag.json"
    f.write_text(json.dumps({"entries": [[{"num": [1], "den": [1, 1]}]]}))
    desc = parse_system(f)
    assert desc.name == "lag"
    assert desc.matrix.shape == (1, 1)
    assert desc.matrix[0, 0](0) == pytest.approx(1)


def test_parse_corpus_example3():
    P = parse_system(CORPUS / "example3.json").matrix
    assert P(0).tolist() == [[0, 1], [-3, -3]]


def test_parameter_substitution():
    P = parse_system(CORPUS / "example5.json", overrides={"b": 100}).matrix
    assert P[0, 1](0) == pytest.approx(100)
    P7 = load_corpus_system("example5", b=7).matrix
    assert P7[0, 1](0) == pytest.approx(7)


@pytest.mark.parametrize("name", ["example1_p1", "example3", "example4", "example6"])
def test_round_trip(tmp_path, name):
    desc = load_corpus_system(name)
    f = tmp_path / "rt.json"
    f.write_text(json.dumps(system_to_dict(desc)))
    again = parse_system(f)
    for a, b in zip(desc.matrix, again.matrix):
        assert (a.num.coefficients == b.num.coefficients).all()
        assert (a.den.coefficients == b.den.coefficients).all()


@pytest.mark.parametrize("content, code", [
    ("{not json", EXIT_PARSE),
    (json.dumps({"entries": [[{"num": [1], "den": [0, 0]}]]}), EXIT_PARSE),
    (json.dumps({"entries": [[{"num": [1], "den": [1]}], []]}), EXIT_PARSE),
    (json.dumps({"entries": [[{"num": ["q"], "den": [1]}]]}), EXIT_PARSE),
])
def test_parse_errors_exit_2(tmp_path, content, code):
    f = tmp_path / "bad.json"
    f.write_text(content)
    assert main(["stability", str(f)]) == code


def test_analysis_error_exit_1():
    assert main(["margins", str(CORPUS / "example3.json")]) == EXIT_ANALYSIS


def test_stability_command(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["stability", str(CORPUS / "example3.json"), "--json", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verdict"]["status"] == "Unstable"
    assert rep["verdict"]["method"] == "direct"
    assert rep["verdict"]["witnesses"][0]["re"] == pytest.approx(0.2, abs=1e-8)
    assert rep["cross_check"]["agrees"]
    assert "tolerances" in rep
    assert "Unstable" in capsys.readouterr().out


def test_nyquist_and_gnc_write_curves(tmp_path):
    assert main(["nyquist", str(CORPUS / "example3.json"), "--curves", str(tmp_path)]) == 0
    assert main(["gnc", str(CORPUS / "example3.json"), "--curves", str(tmp_path)]) == 0
    det = (tmp_path / "example3_det.csv").read_text().splitlines()
    assert det[0] == "omega,re,im,branch"
    assert all(line.endswith(",-1") for line in det[1:])
    loci = (tmp_path / "example3_loci.csv").read_text().splitlines()
    assert {line.rsplit(",", 1)[1] for line in loci[1:]} == {"0", "1"}


def test_margins_command(tmp_path):
    out = tmp_path / "m.json"
    assert main(["margins", str(CORPUS / "example4.json"), "--param", "b=7", "--json", str(out)]) == 0
    m = json.loads(out.read_text())["margins"]
    assert m["k2"] == "inf"
    assert m["theta1"] >= 3 * math.pi / 4


@pytest.mark.parametrize("cmd, files", [
    ("bounds", ["example5"]),
    ("passivity", ["example6"]),
    ("smallgain", ["pr_remark_b", "pr_remark_b"]),
    ("mixed", ["pr_remark_a", "pr_remark_a"]),
])
def test_other_commands(cmd, files, tmp_path):
    out = tmp_path / "o.json"
    args = [cmd] + [str(CORPUS / f"{f}.json") for f in files] + ["--json", str(out)]
    assert main(args) == 0
    assert json.loads(out.read_text())["command"] == cmd


def test_tolerance_flags(tmp_path):
    out = tmp_path / "t.json"
    assert main(["stability", str(CORPUS / "example3.json"), "--tol-marginal", "1e-5",
                 "--tol-root", "1e-8", "--json", str(out)]) == 0
    tol = json.loads(out.read_text())["tolerances"]
    assert tol["marginal"] == 1e-5 and tol["root"] == 1e-8


def test_paper_suite_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["paper-suite", "--json", str(a), "--curves", str(tmp_path / "c")]) == 0
    assert main(["paper-suite", "--json", str(b), "--curves", str(tmp_path / "c")]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_paper_suite_reports_mismatch(monkeypatch):
    import mimostab.suite as suite

    cases = suite.load_expectations()
    cases[0] = dict(cases[0], expect={"status": "Unstable"})
    monkeypatch.setattr(suite, "load_expectations", lambda: cases)
    assert main(["paper-suite"]) == EXIT_MISMATCH
