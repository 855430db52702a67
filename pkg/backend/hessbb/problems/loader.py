"""Line-oriented problem files.

    # comment
    var x1 in [-1, 2]
    var x2 in [-1, 1]
    objective cos(x1)*sin(x2) - x1/(x2^2+1)
    d = [3, 2]            # optional settings block
    route = symbolic
    abs = sign-drop
    form = best
    simplify = full
"""

import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from ..core.expr import Expr
from ..core.interval import Box, Interval
from ..core.parser import parse
from ..enclosure.range_forms import RangeForm
from ..errors import ParseError, ProblemFileError
from ..models import AbsMode, HessianRoute, SimplifyLevel

logger = logging.getLogger(__name__)

_VAR_RE = re.compile(r"^var\s+([A-Za-z_][A-Za-z_0-9]*)\s+in\s*\[\s*([^,\]]+?)\s*,\s*([^,\]]+?)\s*\]$")
_OBJECTIVE_RE = re.compile(r"^objective\s+(.+)$")
_SETTING_RE = re.compile(r"^([A-Za-z_]+)\s*=\s*(.+)$")
_LIST_RE = re.compile(r"^\[(.*)\]$")


class VariableDecl(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    lower: float
    upper: float

    @model_validator(mode="after")
    def _bounds(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"bounds of {self.name} must be finite")
        if self.lower > self.upper:
            raise ValueError(f"lower bound of {self.name} exceeds its upper bound")
        return self


class ProblemSettings(BaseModel):
    """Optional per-problem defaults; None means not set in the file."""

    model_config = ConfigDict(frozen=True)

    var_names: Tuple[str, ...] = ()
    d: Optional[Tuple[float, ...]] = None
    route: Optional[HessianRoute] = None
    abs_mode: Optional[AbsMode] = None
    form: Optional[RangeForm] = None
    simplify: Optional[SimplifyLevel] = None

    @field_validator("d")
    @classmethod
    def _positive(cls, value):
        if value is not None and any(not (math.isfinite(v) and v > 0.0) for v in value):
            raise ValueError("d entries must be positive and finite")
        return value

    def overrides(self) -> Dict[str, Any]:
        fields = {"d": self.d, "route": self.route, "abs_mode": self.abs_mode, "form": self.form,
                  "simplify": self.simplify}
        return {k: v for k, v in fields.items() if v is not None}


class ProblemFile(BaseModel):
    variables: List[VariableDecl]
    objective: str
    settings: ProblemSettings = ProblemSettings()

    @model_validator(mode="after")
    def _consistent(self):
        if not self.variables:
            raise ValueError("no variables declared")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable declared twice")
        if self.settings.d is not None and len(self.settings.d) != len(names):
            raise ValueError(f"d has {len(self.settings.d)} entries for {len(names)} variables")
        return self


class Problem(NamedTuple):
    objective: Expr
    box: Box
    settings: ProblemSettings


_SETTING_KEYS = {"d": "d", "route": "route", "abs": "abs_mode", "form": "form", "simplify": "simplify"}


def _number(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ProblemFileError(f"not a number: {text!r}", line) from None


def parse_problem(text: str) -> Problem:
    variables: List[Dict[str, Any]] = []
    objective: Optional[Tuple[str, int]] = None
    settings: Dict[str, Any] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _VAR_RE.match(line):
            variables.append({"name": m.group(1), "lower": _number(m.group(2), lineno),
                              "upper": _number(m.group(3), lineno), "line": lineno})
        elif m := _OBJECTIVE_RE.match(line):
            if objective is not None:
                raise ProblemFileError("second objective line", lineno)
            objective = (m.group(1), lineno)
        elif m := _SETTING_RE.match(line):
            key, value = m.group(1), m.group(2).strip()
            if key not in _SETTING_KEYS:
                raise ProblemFileError(f"unknown setting {key!r}", lineno)
            if key == "d":
                inner = _LIST_RE.match(value)
                if inner is None:
                    raise ProblemFileError("d must be a list like [1, 2]", lineno)
                value = tuple(_number(v.strip(), lineno) for v in inner.group(1).split(","))
            settings[_SETTING_KEYS[key]] = value
        else:
            raise ProblemFileError(f"cannot read line: {line!r}", lineno)

    if objective is None:
        raise ProblemFileError("no objective")
    for decl in variables:
        try:
            VariableDecl(name=decl["name"], lower=decl["lower"], upper=decl["upper"])
        except ValidationError as exc:
            raise ProblemFileError(exc.errors()[0]["msg"], decl["line"]) from None

    try:
        model = ProblemFile(
            variables=[{k: v for k, v in decl.items() if k != "line"} for decl in variables],
            objective=objective[0],
            settings=ProblemSettings(var_names=tuple(d["name"] for d in variables), **settings),
        )
    except ValidationError as exc:
        raise ProblemFileError(exc.errors()[0]["msg"]) from None

    try:
        expr = parse(model.objective, model.settings.var_names)
    except ParseError as exc:
        raise ParseError(exc.message, exc.position, objective[1]) from exc
    box = Box(tuple(Interval(v.lower, v.upper) for v in model.variables))
    return Problem(expr, box, model.settings)


def load_problem(path: Union[str, Path]) -> Problem:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from exc
    problem = parse_problem(text)
    logger.info("📄 loaded %s: %d variable(s)", path.name, problem.box.dim)
    return problem
