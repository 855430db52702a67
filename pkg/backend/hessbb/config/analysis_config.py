import logging
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from ..errors import ConfigurationError
from ..models import AnalysisSettings

logger = logging.getLogger(__name__)

load_dotenv()

_DEFAULTS = {
    "route": ("HESSBB_ROUTE", "symbolic"),
    "abs_mode": ("HESSBB_ABS_MODE", "sign-drop"),
    "form": ("HESSBB_FORM", "best"),
    "simplify": ("HESSBB_SIMPLIFY", "full"),
    "samples": ("HESSBB_SAMPLES", "10000"),
    "convexity_samples": ("HESSBB_CONVEXITY_SAMPLES", "1000"),
    "seed": ("HESSBB_SEED", "0"),
    "sampler": ("HESSBB_SAMPLER", "halton"),
    "max_iter": ("HESSBB_MAX_ITER", "100000"),
    "log_level": ("HESSBB_LOG_LEVEL", "WARNING"),
    "workers": ("HESSBB_WORKERS", "4"),
}

_INTEGER_KEYS = ("samples", "convexity_samples", "seed", "max_iter", "workers")


class AnalysisConfig:
    """Environment-backed defaults for analysis runs"""

    def __init__(self):
        # Defaults - can be overridden by environment variables
        self.values: Dict[str, str] = {key: os.getenv(env, default) for key, (env, default) in _DEFAULTS.items()}

    def get(self, key: str) -> Any:
        """Get a configured value, integers already converted"""
        if key not in self.values:
            raise ConfigurationError(f"unknown setting: {key}")
        value = self.values[key]
        if key in _INTEGER_KEYS:
            try:
                return int(value)
            except ValueError as exc:
                raise ConfigurationError(f"{_DEFAULTS[key][0]} must be an integer, got {value!r}") from exc
        return value

    def validate(self) -> bool:
        """Check that every value is present and the analysis settings parse"""
        for key, value in self.values.items():
            if not value or value.strip() == "":
                logger.warning("%s is not configured", key)
                return False
        try:
            self.settings()
        except ConfigurationError as exc:
            logger.warning("%s", exc)
            return False
        return True

    def settings(self, overrides: Optional[Dict[str, Any]] = None) -> AnalysisSettings:
        """Analysis settings from the environment, with explicit overrides on top"""
        fields = {key: self.get(key) for key in AnalysisSettings.model_fields if key in self.values}
        fields.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return build_settings(**fields)


def build_settings(**fields) -> AnalysisSettings:
    try:
        return AnalysisSettings(**fields)
    except ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors())
        raise ConfigurationError(f"invalid analysis settings: {problems}") from exc


# Global configuration instance
analysis_config = AnalysisConfig()
