import asyncio
import math

import numpy as np
import pytest

from hessbb import analyze
from hessbb.config.analysis_config import AnalysisConfig, build_settings
from hessbb.core.expr import eval_point
from hessbb.core.interval import Box, Interval, IntervalMatrix
from hessbb.core.parser import format_expr, parse
from hessbb.enclosure.range_forms import RangeForm, natural_eval
from hessbb.errors import ConfigurationError, DegenerateIntervalError
from hessbb.models import AbsMode, HessianRoute, ScalingVector, SimplifyLevel
from hessbb.nodes.alpha import build_hi, classical_alpha, linear_abs_coeffs
from hessbb.nodes.bound import convex_lower_bound
from hessbb.nodes.hessian import interval_hessian, symbolic_hessian
from hessbb.nodes.underestimator import build_underestimator
from hessbb.nodes.verifier import min_sampled_eigenvalue, verify_convexity_sampled, verify_underestimation
from hessbb.optimize.projected_gradient import minimize_box
from hessbb.symbolic.simplify import simplify
from hessbb.workflows.analysis_workflow import STAGES, create_workflow, run_workflow
from hessbb.workflows.compare_workflow import configurations, rank_rows, run_compare

E2_MIN = -2.02181

E1_MATRIX = [
    [(-118, 122), (20, 20), (0, 0), (-120, 120)],
    [(20, 20), (176, 248), (-96, 48), (0, 0)],
    [(0, 0), (-96, 48), (-86, 202), (-10, -10)],
    [(-120, 120), (0, 0), (-10, -10), (-110, 130)],
]
E2_MATRIX = [
    [(-0.8415, 0.8415), (-5.0, 4.8415)],
    [(-5.0, 4.8415), (-18.8415, 8.8415)],
]


def run(problem, **fields):
    settings = build_settings(**{"samples": 2000, "convexity_samples": 200, "d": problem.settings.d, **fields})
    return analyze(problem.objective, problem.box, settings=settings, var_names=problem.settings.var_names)


def classical(problem):
    return run(problem, route="direct", abs_mode="mag")


class TestClassicalAlpha:
    def test_quartic(self, corpus):
        report = classical(corpus["e1"])
        assert report.alpha == pytest.approx([129, 0, 96, 120], abs=1e-9)
        assert report.lower_bound == pytest.approx(-85.1312, abs=1e-3)

    def test_quadratic_sum(self, corpus):
        report = classical(corpus["e3"])
        assert report.alpha == pytest.approx([29, 32], abs=1e-9)
        assert report.lower_bound == pytest.approx(-231.0459, abs=1e-3)

    def test_cubic(self, corpus):
        assert classical(corpus["e5"]).alpha == pytest.approx([0, 19], abs=1e-9)

    def test_trig_with_scaling(self, corpus):
        report = classical(corpus["e2"])
        assert report.alpha == pytest.approx([1.42074, 11.67074], abs=1e-4)
        assert -18.497 <= report.lower_bound <= E2_MIN + 1e-4

    def test_tabulated_quartic_matrix(self):
        H = IntervalMatrix.from_upper(4, lambda i, j: Interval(*E1_MATRIX[i][j]))
        assert classical_alpha(H, ScalingVector(d=(1, 1, 1, 1))) == pytest.approx([129, 0, 96, 120])

    def test_tabulated_trig_matrix(self):
        H = IntervalMatrix.from_upper(2, lambda i, j: Interval(*E2_MATRIX[i][j]))
        assert classical_alpha(H, ScalingVector(d=(3, 2))) == pytest.approx([2.0874, 13.1707], abs=1e-4)

    @pytest.mark.parametrize("alpha, bound", [((2.0874, 13.1707), -18.4970), ((1.4208, 5.4208), -9.3110)])
    def test_trig_bound_for_tabulated_alpha(self, corpus, alpha, bound):
        problem = corpus["e2"]
        g = build_underestimator(problem.objective, list(alpha), problem.box)
        assert convex_lower_bound(g, problem.box)[0] == pytest.approx(bound, abs=2e-3)

    def test_doubling_d_changes_nothing(self, corpus):
        problem = corpus["e2"]
        H = interval_hessian(problem.objective, problem.box, HessianRoute.DIRECT)
        assert classical_alpha(H, ScalingVector(d=(3, 2))) == classical_alpha(H, ScalingVector(d=(6, 4)))


class TestRowFunctions:
    def test_quartic_hessian_level_only(self, corpus):
        report = run(corpus["e1"], abs_mode="sign-drop", simplify="hessian", form="natural")
        assert report.alpha == pytest.approx([69, 0, 48, 60], abs=1e-9)
        assert report.hi_enclosures[0] == Interval(-138, 102)
        assert report.lower_bound == pytest.approx(-43.2171, abs=1e-3)

    def test_quartic_full_simplification_cancels(self, corpus):
        report = run(corpus["e1"], abs_mode="sign-drop", simplify="full")
        assert report.hi_enclosures[0] == Interval(-18, -18)
        assert report.alpha[0] == pytest.approx(9.0)
        assert report.lower_bound == pytest.approx(-1.9768, abs=1e-3)

    def test_quadratic_sum_slope(self, corpus):
        base = classical(corpus["e3"]).lower_bound
        for form in ("slope", "best"):
            report = run(corpus["e3"], form=form)
            assert report.alpha == pytest.approx([21, 24], abs=1e-9)
            assert report.lower_bound == pytest.approx(-168.1901, abs=1e-3)
            assert (report.lower_bound - base) / abs(base) == pytest.approx(0.272, abs=2e-3)

    def test_trig_scaled_rows(self, corpus):
        report = run(corpus["e2"], form="natural")
        assert report.alpha == pytest.approx([1.42074, 6.67074], abs=1e-4)
        assert classical(corpus["e2"]).lower_bound <= report.lower_bound <= E2_MIN + 1e-4

    def test_trig_second_row_weight(self, corpus):
        problem = corpus["e2"]
        settings = build_settings(samples=2000, convexity_samples=200, d=(2, 3), form="natural")
        report = analyze(problem.objective, problem.box, settings=settings)
        assert report.alpha[1] == pytest.approx(5.4208, abs=1e-4)

    def test_exp_simplified_row(self, corpus):
        problem = corpus["e4"]
        hessian = symbolic_hessian(problem.objective, 2, SimplifyLevel.FULL)
        H = interval_hessian(problem.objective, problem.box, HessianRoute.SYMBOLIC, RangeForm.NATURAL, hessian)
        h2 = build_hi(problem.objective, 1, ScalingVector(d=(1, 2)), H, AbsMode.SIGN_DROP, hessian)
        assert format_expr(h2) == "exp(x2)*(-3-2*x1+4*exp(x2))"

    def test_simplification_never_widens_rows(self, corpus):
        for key in ("e1", "e2", "e3", "e4"):
            problem = corpus[key]
            f, box, n = problem.objective, problem.box, problem.box.dim
            d = ScalingVector(d=tuple(problem.settings.d or box.widths()))
            raw = symbolic_hessian(f, n, SimplifyLevel.OFF)
            tidy = symbolic_hessian(f, n, SimplifyLevel.FULL)
            H = interval_hessian(f, box, HessianRoute.SYMBOLIC, RangeForm.NATURAL, tidy)
            for i in range(n):
                before = natural_eval(build_hi(f, i, d, H, AbsMode.SIGN_DROP, raw, simplified=False), box)
                after = natural_eval(build_hi(f, i, d, H, AbsMode.SIGN_DROP, tidy), box)
                assert after.width <= before.width + 1e-9 * (1.0 + before.width), (key, i)

    def test_exp_bounds_by_simplify_level(self, corpus):
        tidy = run(corpus["e4"], form="natural")
        assert tidy.alpha == pytest.approx([2 * math.e ** 2 - 1, math.e ** 2 / 2], rel=1e-9)
        assert tidy.lower_bound == pytest.approx(-6.5629, abs=1e-3)
        raw = run(corpus["e4"], form="natural", simplify="off")
        assert raw.lower_bound == pytest.approx(-12.65, abs=5e-2)

    @pytest.mark.parametrize("mode, alpha2, row", [
        ("sign-drop", 19, None),
        ("shift", 12, Interval(-24, 32)),
        ("linear", 9, Interval(-18, 26)),
    ])
    def test_cubic_abs_modes(self, corpus, mode, alpha2, row):
        report = run(corpus["e5"], abs_mode=mode, form="natural")
        assert report.alpha == pytest.approx([0, alpha2], abs=1e-9)
        if row is not None:
            assert report.hi_enclosures[1].lo == pytest.approx(row.lo, abs=1e-9)
            assert report.hi_enclosures[1].hi == pytest.approx(row.hi, abs=1e-9)

    def test_mag_reduces_to_classical(self, corpus):
        for problem in corpus.values():
            report = run(problem, abs_mode="mag", simplify="hessian", form="natural")
            d = ScalingVector(d=tuple(report.d_used))
            expected = classical_alpha(report.hessian_enclosure, d)
            assert report.alpha == pytest.approx(expected, rel=1e-12, abs=1e-12)


class TestAbsSurrogate:
    def test_coefficients(self):
        assert linear_abs_coeffs(Interval(-30, 10)) == (-0.5, 15.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateIntervalError):
            linear_abs_coeffs(Interval(2, 2))

    def test_dominates_abs_and_stays_below_mag(self, rng):
        for _ in range(50):
            y = Interval(*sorted(rng.uniform(-10, 10, 2)))
            gamma, beta = linear_abs_coeffs(y)
            samples = rng.uniform(y.lo, y.hi, 1000)
            surrogate = gamma * samples + beta
            assert np.all(np.abs(samples) <= surrogate + 1e-12)
            assert np.all(surrogate <= y.mag + 1e-12)
            assert gamma * y.lo + beta == pytest.approx(abs(y.lo))
            assert gamma * y.hi + beta == pytest.approx(abs(y.hi))


class TestUnderestimator:
    def test_concave_square(self):
        g = build_underestimator(parse("-x^2", ["x"]), [1.0], Box.from_bounds([(0, 1)]))
        assert format_expr(simplify(g)) == "-x1"

    def test_zero_alpha_is_identity(self):
        f = parse("x1*x2", ["x1", "x2"])
        assert build_underestimator(f, [0.0, 0.0], Box.from_bounds([(0, 1), (0, 1)])) is f

    def test_rejects_bad_alpha(self):
        box = Box.from_bounds([(0, 1)])
        with pytest.raises(ValueError):
            build_underestimator(parse("x", ["x"]), [-1.0], box)
        with pytest.raises(ValueError):
            build_underestimator(parse("x", ["x"]), [float("nan")], box)
        with pytest.raises(ValueError):
            build_underestimator(parse("x", ["x"]), [1.0, 1.0], box)

    def test_default_mode_verifies_on_corpus(self, corpus):
        for key, problem in corpus.items():
            report = run(problem, samples=10_000, convexity_samples=1000)
            assert report.verified_underestimation, key
            assert report.verified_convexity, key
            assert report.lower_bound <= eval_point(problem.objective, report.minimizer) + 1e-9

    def test_underestimator_touches_f_at_corners(self, corpus):
        problem = corpus["e3"]
        report = run(problem)
        for corner in ([0, 0], [0, 4], [4, 0], [4, 4]):
            f, g = eval_point(problem.objective, corner), eval_point(report.underestimator, corner)
            assert g == pytest.approx(f, rel=1e-9, abs=1e-9)


class TestVerification:
    def test_detects_overestimate(self):
        box = Box.from_bounds([(-1, 1)])
        assert not verify_underestimation(parse("x^2", ["x"]), parse("x^2 + 1", ["x"]), box, samples=100)
        assert verify_underestimation(parse("x^2", ["x"]), parse("x^2 - 1", ["x"]), box, samples=100)

    def test_detects_concavity(self):
        box = Box.from_bounds([(-1, 1), (-1, 1)])
        g = parse("x1^2 - x2^2", ["x1", "x2"])
        assert min_sampled_eigenvalue(g, box, samples=50) == pytest.approx(-2.0)
        assert not verify_convexity_sampled(g, box, samples=50)


class TestAnalyze:
    def test_fixed_variable_is_substituted(self):
        f = parse("x1^2 + x1*x2", ["x1", "x2"])
        report = analyze(f, Box.from_bounds([(0, 1), (2, 2)]), settings=build_settings(samples=500))
        assert report.active == [0]
        assert report.alpha == [0.0, 0.0]
        assert report.hi_enclosures[1] is None and report.d_used[1] is None
        assert report.minimizer[1] == 2.0
        assert report.lower_bound == pytest.approx(0.0, abs=1e-9)

    def test_all_fixed(self):
        report = analyze(parse("x1 + x2", ["x1", "x2"]), Box.from_bounds([(1, 1), (2, 2)]))
        assert report.lower_bound == 3.0
        assert report.active == []

    def test_dimension_mismatch(self):
        f = parse("x1 + x3", ["x1", "x2", "x3"])
        with pytest.raises(ConfigurationError):
            analyze(f, Box.from_bounds([(0, 1), (0, 1)]))
        with pytest.raises(ConfigurationError):
            analyze(parse("x1", ["x1"]), Box.from_bounds([(0, 1)]), d=[1.0, 2.0])

    def test_rigorous_bound_is_below(self, corpus):
        report = run(corpus["e3"], route="direct", abs_mode="mag", rigorous=True)
        assert report.certified_lower_bound is not None
        assert report.certified_lower_bound <= report.lower_bound
        assert "certified_lower_bound" in report.to_json_dict()

    def test_keyword_overrides(self, corpus):
        problem = corpus["e5"]
        report = analyze(problem.objective, problem.box, route="direct", mode="mag",
                         settings=build_settings(samples=500))
        assert report.settings.route is HessianRoute.DIRECT
        assert report.alpha == pytest.approx([0, 19])

    def test_stage_order(self):
        graph = create_workflow(build_settings())
        names = [name for name in graph.nodes if not name.startswith("__")]
        assert names == list(STAGES) == ["hessian", "alpha", "underestimator", "bound", "verifier"]

    def test_graph_fills_state(self, corpus):
        problem = corpus["e3"]
        initial = {"objective": problem.objective, "box": problem.box, "scaling": ScalingVector(d=(4, 4))}
        state = run_workflow(initial, build_settings(route="direct", abs_mode="mag", samples=500))
        assert state["alpha"] == pytest.approx([29, 32])
        assert state.get("hi_exprs") is None
        assert isinstance(state["warnings"], list)
        assert state["verified_underestimation"]


class TestMinimizer:
    def test_hits_active_bound(self):
        def fun(x):
            return float((x[0] - 2) ** 2 + (x[1] + 1) ** 2), np.array([2 * (x[0] - 2), 2 * (x[1] + 1)])

        result = minimize_box(fun, [0, -5], [1, 5])
        assert result.success
        assert result.x == pytest.approx([1.0, -1.0], abs=1e-6)
        assert result.fun == pytest.approx(1.0, abs=1e-9)

    def test_iteration_cap(self):
        def fun(x):
            return float(np.sum(x ** 4)), 4 * x ** 3

        result = minimize_box(fun, [-1, -1], [2, 2], x0=[2, 2], max_iter=1)
        assert not result.success
        assert result.status == 2


class TestCompare:
    def test_matrix_is_deduplicated(self):
        assert len(configurations(build_settings())) == 76

    def test_rank_rows(self):
        rows = [
            {"mode": {"route": "direct", "abs": "mag"}, "lower_bound": -10.0, "improvement": None},
            {"mode": {"route": "symbolic", "abs": "shift"}, "lower_bound": None, "improvement": None},
            {"mode": {"route": "symbolic", "abs": "sign-drop"}, "lower_bound": -5.0, "improvement": None},
        ]
        ranked = rank_rows(rows)
        assert [r["lower_bound"] for r in ranked] == [-5.0, -10.0, None]
        assert ranked[0]["improvement"] == pytest.approx(0.5)

    def test_cubic_modes(self, corpus):
        problem = corpus["e5"]
        rows = asyncio.run(run_compare(
            problem.objective, problem.box, build_settings(samples=500, convexity_samples=100),
            abs_modes=["mag", "sign-drop", "shift", "linear"], forms=["natural"], simplify_levels=["full"],
            workers=2,
        ))
        assert all(row["error"] is None for row in rows)
        second = [row["alpha"][1] for row in rows]
        for expected in (9.0, 12.0, 19.0):
            assert any(a == pytest.approx(expected) for a in second), expected
        assert min(second) == pytest.approx(9.0)


class TestConfig:
    def test_environment_defaults(self, monkeypatch):
        monkeypatch.setenv("HESSBB_ROUTE", "direct")
        monkeypatch.setenv("HESSBB_SAMPLES", "123")
        settings = AnalysisConfig().settings()
        assert settings.route is HessianRoute.DIRECT
        assert settings.samples == 123

    def test_overrides_win(self, monkeypatch):
        monkeypatch.setenv("HESSBB_FORM", "slope")
        assert AnalysisConfig().settings({"form": "natural"}).form is RangeForm.NATURAL

    def test_invalid_values(self, monkeypatch):
        monkeypatch.setenv("HESSBB_SAMPLES", "many")
        config = AnalysisConfig()
        with pytest.raises(ConfigurationError):
            config.get("samples")
        assert not config.validate()
        with pytest.raises(ConfigurationError):
            build_settings(route="sideways")

    def test_scaling_vector(self):
        with pytest.raises(ValueError):
            ScalingVector(d=(1.0, 0.0))
        assert ScalingVector(d=(3, 2)).ratio(1, 0) == pytest.approx(2 / 3)
