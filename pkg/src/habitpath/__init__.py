"""Optimal lifetime consumption paths under habit-forming and
peer-referenced utilities: scenario configs, closed-form oracles, a
budget-constrained ascent solver, shape diagnostics, and figure presets.
"""

from .core import (ConfigError, DomainError, InfeasibleStartError,
                   PerCapitaSpec, ScenarioConfig, SolverOptions, UtilitySpec,
                   load_scenario, percapita_path, scenario_from_dict,
                   scenario_to_dict, validate_config, with_param)
from .objective import ObjectiveEval, finite_diff_gradient, lifetime_objective
from .oracle import (ShapeMetrics, brute_force_small, cuj_cara_closed_form,
                     separable_cara_closed_form, separable_crra_closed_form,
                     shape_metrics)
from .presets import FigureCurve, FigurePreset, check_figure, figure_preset
from .selftest import CheckResult, run_selftests
from .solver import SolveResult, solve
from .utility import felicity_series, habit_series

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "InfeasibleStartError",
    "PerCapitaSpec", "ScenarioConfig", "SolverOptions", "UtilitySpec",
    "load_scenario", "percapita_path", "scenario_from_dict",
    "scenario_to_dict", "validate_config", "with_param",
    "ObjectiveEval", "finite_diff_gradient", "lifetime_objective",
    "ShapeMetrics", "brute_force_small", "cuj_cara_closed_form",
    "separable_cara_closed_form", "separable_crra_closed_form", "shape_metrics",
    "FigureCurve", "FigurePreset", "check_figure", "figure_preset",
    "CheckResult", "run_selftests",
    "SolveResult", "solve",
    "felicity_series", "habit_series",
    "__version__",
]
