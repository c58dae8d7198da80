"""Simulation and estimation toolkit comparing SARS-CoV-2 risk-factor study designs."""

from ._core import (
    ConfigError,
    EstimationError,
    TndipwError,
    estimate,
    fit_logistic,
    run_experiment,
    scenario,
    simulate,
)

__all__ = [
    "ConfigError",
    "EstimationError",
    "TndipwError",
    "estimate",
    "fit_logistic",
    "run_experiment",
    "scenario",
    "simulate",
]
