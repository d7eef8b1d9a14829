"""Simulation and spectral analysis of 1-D wave equations with piecewise
Kelvin-Voigt damping and delayed (boundary or interior) velocity feedback."""

from .model import (
    ConfigError,
    HypothesisReport,
    InitialData,
    Scenario,
    ScenarioMismatchError,
    Selector,
    WaveConfig,
    check_hypothesis,
    check_hypothesis_H,
    check_hypothesis_H1,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "HypothesisReport",
    "InitialData",
    "Scenario",
    "ScenarioMismatchError",
    "Selector",
    "WaveConfig",
    "check_hypothesis",
    "check_hypothesis_H",
    "check_hypothesis_H1",
    "config_from_dict",
    "config_hash",
    "config_to_dict",
    "load_config",
    "validate_config",
]
