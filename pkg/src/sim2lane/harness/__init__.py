from .ablation import AblationCurves, AblationPoint, run_ablation, subset_for_multiplier
from .experiment import (
    STDDEV_CONVENTION,
    AggregateReport,
    ExperimentSpec,
    StrategyReport,
    aggregate,
    run_experiment,
    summarize_run,
)
from .plots import curve_plot
from .visualize import class_color, visualize

__all__ = [
    "AblationCurves",
    "AblationPoint",
    "AggregateReport",
    "ExperimentSpec",
    "STDDEV_CONVENTION",
    "StrategyReport",
    "aggregate",
    "class_color",
    "curve_plot",
    "run_ablation",
    "run_experiment",
    "subset_for_multiplier",
    "summarize_run",
    "visualize",
]
