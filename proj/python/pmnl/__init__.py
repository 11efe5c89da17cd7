"""Poisson-MNL assortment and pricing: bindings to the C++ core."""

from ._pmnl import (
    ConfigError,
    InvalidInput,
    choice_probabilities,
    cli,
    policy_names,
    run,
    scenario_json,
    shipped_scenarios,
    validate,
)

__all__ = [
    "ConfigError",
    "InvalidInput",
    "choice_probabilities",
    "cli",
    "policy_names",
    "run",
    "scenario_json",
    "shipped_scenarios",
    "validate",
]
