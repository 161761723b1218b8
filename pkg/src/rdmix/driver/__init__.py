"""CLI entry point, configuration, benchmark presets and output writers."""

from .config import Config, ConfigError, load_config, parse_config
from .presets import PRESETS, preset
from .run import Problem, RunReport, convergence_study, run
from .wavefront import FieldEvaluator, track_wavefront

__all__ = [
    "Config", "ConfigError", "load_config", "parse_config",
    "PRESETS", "preset", "Problem", "RunReport", "convergence_study", "run",
    "FieldEvaluator", "track_wavefront",
]
