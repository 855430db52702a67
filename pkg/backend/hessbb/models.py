"""Configuration and report models shared by the pipeline and the CLI."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .core.expr import Expr
from .core.interval import Interval, IntervalMatrix
from .enclosure.range_forms import RangeForm


class HessianRoute(str, Enum):
    DIRECT = "direct"
    SYMBOLIC = "symbolic"


class AbsMode(str, Enum):
    MAG = "mag"
    SIGN_DROP = "sign-drop"
    SHIFT = "shift"
    LINEAR = "linear"


class SimplifyLevel(str, Enum):
    FULL = "full"
    HESSIAN = "hessian"
    OFF = "off"


class Sampler(str, Enum):
    HALTON = "halton"
    SOBOL = "sobol"


class ScalingVector(BaseModel):
    """Positive Gerschgorin scaling weights, one per variable."""

    model_config = ConfigDict(frozen=True)

    d: Tuple[float, ...]

    @field_validator("d")
    @classmethod
    def _positive(cls, value):
        if not value:
            raise ValueError("scaling vector is empty")
        if any(not (v > 0.0) or v == float("inf") for v in value):
            raise ValueError(f"scaling weights must be positive and finite, got {list(value)}")
        return value

    def __len__(self) -> int:
        return len(self.d)

    def __getitem__(self, i: int) -> float:
        return self.d[i]

    def ratio(self, j: int, i: int) -> float:
        return self.d[j] / self.d[i]


class AnalysisSettings(BaseModel):
    """Validated, immutable configuration of one analysis run."""

    model_config = ConfigDict(frozen=True)

    route: HessianRoute = HessianRoute.SYMBOLIC
    abs_mode: AbsMode = AbsMode.SIGN_DROP
    form: RangeForm = RangeForm.BEST
    simplify: SimplifyLevel = SimplifyLevel.FULL
    d: Optional[Tuple[float, ...]] = None
    rigorous: bool = False
    samples: int = Field(default=10_000, ge=1)
    convexity_samples: int = Field(default=1_000, ge=1)
    seed: int = 0
    sampler: Sampler = Sampler.HALTON
    max_iter: int = Field(default=100_000, ge=1)

    def mode(self) -> Dict[str, str]:
        return {
            "route": self.route.value,
            "abs": self.abs_mode.value,
            "form": self.form.value,
            "simplify": self.simplify.value,
        }

    def label(self) -> str:
        return "/".join(self.mode().values())


@dataclass
class UnderestimatorReport:
    """Everything one analysis produced; to_json_dict gives the CLI schema."""

    alpha: List[float]
    hessian_enclosure: IntervalMatrix
    hi_enclosures: List[Optional[Interval]]
    lower_bound: float
    underestimator: Expr
    underestimator_text: str
    settings: AnalysisSettings
    d_used: List[Optional[float]]
    active: List[int]
    minimizer: List[float]
    iterations: int
    converged: bool
    verified_underestimation: bool
    verified_convexity: bool
    certified_lower_bound: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    def to_json_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "alpha": list(self.alpha),
            "lower_bound": self.lower_bound,
            "hessian": self.hessian_enclosure.to_list(),
            "hi": [None if iv is None else iv.to_list() for iv in self.hi_enclosures],
            "mode": self.settings.mode(),
            "d": list(self.d_used),
            "active": list(self.active),
            "underestimator": self.underestimator_text,
            "minimizer": list(self.minimizer),
            "iterations": self.iterations,
            "converged": self.converged,
            "sampler": self.settings.sampler.value,
            "verified": {
                "underestimation": self.verified_underestimation,
                "convexity": self.verified_convexity,
            },
            "warnings": list(self.warnings),
        }
        if self.certified_lower_bound is not None:
            data["certified_lower_bound"] = self.certified_lower_bound
        return data
