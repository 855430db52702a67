import asyncio
import itertools
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

from ..config.analysis_config import build_settings
from ..core.expr import Expr
from ..core.interval import Box
from ..enclosure.range_forms import RangeForm
from ..errors import VerificationError
from ..models import AbsMode, AnalysisSettings, HessianRoute, SimplifyLevel
from .analysis_workflow import analyze

logger = logging.getLogger(__name__)

ALL_ROUTES = tuple(HessianRoute)
ALL_ABS_MODES = tuple(AbsMode)
ALL_FORMS = tuple(RangeForm)
ALL_SIMPLIFY_LEVELS = tuple(SimplifyLevel)


def configurations(
    base: AnalysisSettings,
    routes: Iterable = ALL_ROUTES,
    abs_modes: Iterable = ALL_ABS_MODES,
    forms: Iterable = ALL_FORMS,
    simplify_levels: Iterable = ALL_SIMPLIFY_LEVELS,
) -> List[AnalysisSettings]:
    """Distinct settings of the route x abs x form x simplify matrix.

    The direct route never simplifies, and direct + mag uses no range form, so
    those axes collapse to a single value there.
    """
    seen = {}
    for route, mode, form, level in itertools.product(
        map(HessianRoute, routes), map(AbsMode, abs_modes), map(RangeForm, forms), map(SimplifyLevel, simplify_levels)
    ):
        if route is HessianRoute.DIRECT:
            level = SimplifyLevel.OFF
            if mode is AbsMode.MAG:
                form = RangeForm.NATURAL
        key = (route, mode, form, level)
        if key not in seen:
            seen[key] = build_settings(**{**base.model_dump(), "route": route, "abs_mode": mode,
                                          "form": form, "simplify": level})
    return list(seen.values())


def _row(settings: AnalysisSettings) -> Dict[str, Any]:
    return {"label": settings.label(), "mode": settings.mode(), "alpha": None, "lower_bound": None,
            "verified": None, "improvement": None, "error": None}


def _run_one(f: Expr, box: Box, settings: AnalysisSettings, var_names) -> Dict[str, Any]:
    row = _row(settings)
    try:
        report = analyze(f, box, settings=settings, var_names=var_names)
    except VerificationError as e:
        report = e.report
        row["error"] = str(e)
    except Exception as e:
        logger.warning("❌ %s failed: %s", settings.label(), e)
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(
        alpha=report.alpha,
        lower_bound=report.lower_bound,
        verified={"underestimation": report.verified_underestimation, "convexity": report.verified_convexity},
    )
    return row


def _classical_bound(rows: Sequence[Dict[str, Any]]) -> Optional[float]:
    for row in rows:
        if row["mode"]["route"] == HessianRoute.DIRECT.value and row["mode"]["abs"] == AbsMode.MAG.value:
            return row["lower_bound"]
    return None


def rank_rows(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Attach the improvement over the classical row and sort by bound, best first."""
    classical = _classical_bound(rows)
    for row in rows:
        if classical is not None and classical != 0.0 and row["lower_bound"] is not None:
            row["improvement"] = (row["lower_bound"] - classical) / abs(classical)
    failed = [r for r in rows if r["lower_bound"] is None]
    ranked = sorted((r for r in rows if r["lower_bound"] is not None), key=lambda r: r["lower_bound"], reverse=True)
    return ranked + failed


async def run_compare(
    f: Expr,
    box: Box,
    base: AnalysisSettings,
    routes: Iterable = ALL_ROUTES,
    abs_modes: Iterable = ALL_ABS_MODES,
    forms: Iterable = ALL_FORMS,
    simplify_levels: Iterable = ALL_SIMPLIFY_LEVELS,
    workers: int = 4,
    var_names: Optional[Sequence[str]] = None,
) -> List[Dict[str, Any]]:
    """Analyze every configuration concurrently; failures stay in their row"""
    matrix = configurations(base, routes, abs_modes, forms, simplify_levels)
    logger.info("🔄 comparing %d configurations with %d workers", len(matrix), workers)
    semaphore = asyncio.Semaphore(max(1, workers))

    async def run(settings: AnalysisSettings) -> Dict[str, Any]:
        async with semaphore:
            return await asyncio.to_thread(_run_one, f, box, settings, var_names)

    rows = await asyncio.gather(*(run(s) for s in matrix))
    logger.info("✅ comparison completed")
    return rank_rows(list(rows))


def format_table(rows: Sequence[Dict[str, Any]]) -> str:
    """Fixed-width text table, values rounded to 4 decimals"""
    header = f"{'route':<9}{'abs':<10}{'form':<8}{'simplify':<9}{'lower bound':>14}{'gain':>9}  {'ok':<3} alpha"
    lines = [header, "-" * len(header)]
    for row in rows:
        mode = row["mode"]
        prefix = f"{mode['route']:<9}{mode['abs']:<10}{mode['form']:<8}{mode['simplify']:<9}"
        if row["lower_bound"] is None:
            lines.append(f"{prefix}{'error':>14}{'':>9}  {'-':<3} {row['error']}")
            continue
        gain = f"{100 * row['improvement']:.1f}%" if row["improvement"] is not None else ""
        ok = "yes" if all(row["verified"].values()) else "no"
        alpha = ", ".join(f"{a:.4f}" for a in row["alpha"])
        lines.append(f"{prefix}{row['lower_bound']:>14.4f}{gain:>9}  {ok:<3} ({alpha})")
    return "\n".join(lines)
