"""Growth of a two-colored population on a refreshed weighted stochastic block
model, its deterministic mean-field map, and numerical checks linking them."""
from .core import (
    Color,
    EmptyPopulation,
    LambdaOutOfRange,
    ModelParams,
    NonPositiveRate,
    ParameterError,
    Population,
    PopulationOverflow,
    PreconditionViolated,
    ProbabilityOverflow,
    SeedSpec,
    TooLarge,
    validate_params,
)
from .detmap import DetParams, Phase, Stability, classify_phase, f_derivative, f_update, fixed_points, iterate
from .dynamics import StepRecord, run_trajectory, run_trials, step
from .sbm import ColoredVertexSet, ColorWeights, WeightedGraph, color_weights, sample_graph

__version__ = "0.1.0"

__all__ = [
    "classify_phase",
    "Color",
    "color_weights",
    "ColoredVertexSet",
    "ColorWeights",
    "DetParams",
    "EmptyPopulation",
    "f_derivative",
    "f_update",
    "fixed_points",
    "iterate",
    "LambdaOutOfRange",
    "ModelParams",
    "NonPositiveRate",
    "ParameterError",
    "Phase",
    "Population",
    "PopulationOverflow",
    "PreconditionViolated",
    "ProbabilityOverflow",
    "run_trajectory",
    "run_trials",
    "sample_graph",
    "SeedSpec",
    "Stability",
    "step",
    "StepRecord",
    "TooLarge",
    "validate_params",
    "WeightedGraph",
]
