"""Python access to the cafo core: grids, builtin patterns and failover sessions."""

from ._core import (
    Grid,
    Rule,
    Session,
    builtin_cells,
    builtin_names,
    default_config_json,
    period,
    place,
    run_scenario,
    validate,
)

__all__ = [
    "Grid",
    "Rule",
    "Session",
    "builtin_cells",
    "builtin_names",
    "default_config_json",
    "period",
    "place",
    "run_scenario",
    "validate",
]
