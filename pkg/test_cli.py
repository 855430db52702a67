import json
import logging

import numpy as np
import pytest

from hessbb import analyze
from hessbb.config.analysis_config import build_settings
from hessbb.errors import ParseError, ProblemFileError
from hessbb.models import HessianRoute
from hessbb.problems.loader import load_problem, parse_problem
from main import main

FAST = ["--samples", "500", "--convexity-samples", "100"]

CONVEX = """\
var x1 in [-1, 1]
var x2 in [-1, 1]
objective x1^2 + x2^2
"""


def _write(tmp_path, text, name="problem.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _analyze(capsys, *argv):
    code = main(["analyze", *argv, *FAST])
    return code, json.loads(capsys.readouterr().out)


class TestProblemFiles:
    def test_corpus_loads(self, corpus):
        problem = corpus["e2"]
        assert problem.settings.var_names == ("x1", "x2")
        assert problem.settings.d == (3.0, 2.0)
        assert problem.box.to_list() == [[-1.0, 2.0], [-1.0, 1.0]]

    def test_settings_block(self):
        problem = parse_problem(CONVEX + "route = direct\nabs = mag\nform = slope\nsimplify = off\n")
        assert problem.settings.overrides() == {"route": HessianRoute.DIRECT, "abs_mode": "mag",
                                                "form": "slope", "simplify": "off"}

    def test_comments_and_blank_lines(self):
        problem = parse_problem("# header\n\nvar y in [0, 1]  # trailing\nobjective y^2\n")
        assert problem.settings.var_names == ("y",)

    def test_expression_error_carries_line(self):
        with pytest.raises(ParseError) as exc:
            parse_problem("var x in [0, 1]\nobjective x +* 2\n")
        assert exc.value.line == 2
        assert exc.value.position == 3

    @pytest.mark.parametrize("text, message", [
        ("var x in [0, 1]\n", "no objective"),
        ("var x in [0, 1]\nobjective x\nobjective x^2\n", "second objective line"),
        ("var x in [0, 1]\nobjective x\ncolor = red\n", "unknown setting"),
        ("var x in [2, 1]\nobjective x\n", "exceeds"),
        ("var x in [0, 1]\nvar x in [0, 1]\nobjective x\n", "declared twice"),
        ("var x in [0, 1]\nobjective x\nd = [1, 2]\n", "d has 2 entries"),
        ("var x in [0, one]\nobjective x\n", "not a number"),
        ("objective 1\n", "no variables"),
        ("minimize x\n", "cannot read line"),
    ])
    def test_structural_errors(self, text, message):
        with pytest.raises(ProblemFileError, match=message):
            parse_problem(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ProblemFileError):
            load_problem(tmp_path / "absent.txt")


class TestAnalyzeCommand:
    def test_classical_quartic(self, capsys, problem_path):
        code, report = _analyze(capsys, problem_path("e1"), "--route", "direct", "--abs", "mag")
        assert code == 0
        assert report["alpha"] == pytest.approx([129, 0, 96, 120])
        assert report["mode"] == {"route": "direct", "abs": "mag", "form": "best", "simplify": "full"}
        assert report["verified"] == {"underestimation": True, "convexity": True}

    def test_exp_without_simplification(self, capsys, problem_path):
        code, report = _analyze(capsys, problem_path("e4"), "--route", "symbolic", "--form", "natural",
                                "--no-simplify")
        assert code == 0
        assert report["lower_bound"] == pytest.approx(-12.65, abs=5e-2)
        assert report["mode"]["simplify"] == "off"

    def test_convex_input_needs_no_alpha(self, capsys, tmp_path):
        code, report = _analyze(capsys, _write(tmp_path, CONVEX))
        assert code == 0
        assert report["alpha"] == [0.0, 0.0]
        assert report["lower_bound"] == pytest.approx(0.0, abs=1e-12)
        assert report["underestimator"] == "x1^2+x2^2"

    def test_d_flag_overrides_file(self, capsys, tmp_path):
        path = _write(tmp_path, CONVEX + "d = [5, 1]\n")
        assert _analyze(capsys, path)[1]["d"] == [5.0, 1.0]
        assert _analyze(capsys, path, "--d", "1,3")[1]["d"] == [1.0, 3.0]
        assert _analyze(capsys, path, "--d", "width")[1]["d"] == [2.0, 2.0]

    def test_deterministic_output(self, capsys, problem_path):
        main(["analyze", problem_path("e3"), *FAST])
        first = capsys.readouterr().out
        main(["analyze", problem_path("e3"), *FAST])
        assert capsys.readouterr().out == first

    def test_json_matches_library(self, capsys, corpus, problem_path):
        _, data = _analyze(capsys, problem_path("e5"))
        problem = corpus["e5"]
        report = analyze(problem.objective, problem.box,
                         settings=build_settings(samples=500, convexity_samples=100))
        assert data["alpha"] == report.alpha
        assert data["lower_bound"] == report.lower_bound

    def test_rigorous_flag(self, capsys, problem_path):
        _, report = _analyze(capsys, problem_path("e3"), "--rigorous")
        assert report["certified_lower_bound"] <= report["lower_bound"]

    def test_missing_objective_exits_1(self, tmp_path, caplog):
        with caplog.at_level(logging.ERROR):
            code = main(["analyze", _write(tmp_path, "var x in [0, 1]\n")])
        assert code == 1
        assert "no objective" in caplog.text

    def test_bad_d_flag(self, problem_path):
        assert main(["analyze", problem_path("e3"), "--d", "1,x"]) == 1


class TestCompareCommand:
    def test_rows_sorted_best_first(self, capsys, problem_path):
        code = main(["compare", problem_path("e5"), "--abs-modes", "mag,shift,linear", "--forms", "natural",
                     "--simplify-levels", "full", "--workers", "2", *FAST])
        assert code == 0
        rows = json.loads(capsys.readouterr().out)
        bounds = [row["lower_bound"] for row in rows]
        assert bounds == sorted(bounds, reverse=True)
        classical = [r for r in rows if r["mode"]["route"] == "direct" and r["mode"]["abs"] == "mag"]
        assert len(classical) == 1 and classical[0]["improvement"] == 0.0

    def test_rejects_unknown_mode(self, problem_path):
        with pytest.raises(SystemExit):
            main(["compare", problem_path("e5"), "--abs-modes", "mag,abs"])


class TestPlotCommand:
    def test_grid_csv(self, tmp_path, problem_path):
        out = tmp_path / "e2.csv"
        assert main(["plot", problem_path("e2"), "--grid", "11", "--out", str(out), *FAST]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x1,x2,f,g"
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert data.shape == (121, 4)
        f, g = data[:, 2], data[:, 3]
        assert np.all(g <= f + 1e-9)
        for x1 in (-1.0, 2.0):
            for x2 in (-1.0, 1.0):
                row = data[(data[:, 0] == x1) & (data[:, 1] == x2)][0]
                assert row[3] == pytest.approx(row[2], rel=1e-9, abs=1e-9)

    def test_one_dimensional(self, tmp_path):
        out = tmp_path / "line.csv"
        path = _write(tmp_path, "var t in [0, 3]\nobjective sin(t)\n")
        assert main(["plot", path, "--grid", "5", "--out", str(out), *FAST]) == 0
        assert out.read_text().splitlines()[0] == "x1,f,g"
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert data[:, 0].tolist() == [0.0, 0.75, 1.5, 2.25, 3.0]

    def test_rejects_four_variables(self, tmp_path, problem_path):
        assert main(["plot", problem_path("e1"), "--out", str(tmp_path / "x.csv")]) == 1


class TestHelp:
    def test_form_help_names_the_derivative_form(self, capsys):
        with pytest.raises(SystemExit):
            main(["analyze", "--help"])
        text = " ".join(capsys.readouterr().out.split())
        assert "mvf (derivative mean-value form)" in text
        assert "only slope and best reach alpha = (21, 24)" in text
