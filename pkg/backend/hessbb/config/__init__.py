from .analysis_config import AnalysisConfig, analysis_config, build_settings

__all__ = ["AnalysisConfig", "analysis_config", "build_settings"]
