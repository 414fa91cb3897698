"""Python access to the swarmsim engine."""

from ._swarmsim import (
    ScenarioError,
    avoidance_term,
    chain_topology,
    export_curves,
    load_scenario,
    replay,
    run,
    scenario_hash,
    six_uav_example,
    solve_assignment,
)

__all__ = [
    "ScenarioError",
    "avoidance_term",
    "chain_topology",
    "export_curves",
    "load_scenario",
    "replay",
    "run",
    "scenario_hash",
    "six_uav_example",
    "solve_assignment",
]
