"""Python bindings for the yudovich C++ core."""

import json

from ._core import (
    ArgumentError,
    Density,
    DomainError,
    GammaFamily,
    Green,
    Modulus,
    NumericalError,
    green,
    integrate_vortices,
    newton_potential,
    newton_second_derivatives,
    run_scenario_json,
    self_check,
)

__version__ = "0.3.0"


def run_scenario(subcommand, scenario):
    """Run a scenario (dict or JSON text) in memory; returns the parsed outcome with CSV texts under 'files'."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    _, out = run_scenario_json(subcommand, text)
    return json.loads(out)


__all__ = [
    "ArgumentError",
    "Density",
    "DomainError",
    "GammaFamily",
    "Green",
    "Modulus",
    "NumericalError",
    "green",
    "integrate_vortices",
    "newton_potential",
    "newton_second_derivatives",
    "run_scenario",
    "self_check",
]
