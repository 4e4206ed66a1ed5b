"""Discrete-event simulation of PRP nodes on a virtual grid."""

from .engine import Simulator, run
from .metrics import DROP_CAUSES, Metrics, metrics_csv
from .mobility import RandomWaypoint
from .scenario import Flow, Mobility, RandomTraffic, Scenario, ScenarioError, load_scenario, scenario_from_dict

__all__ = [
    "DROP_CAUSES", "Flow", "Metrics", "Mobility", "RandomTraffic", "RandomWaypoint", "Scenario",
    "ScenarioError", "Simulator", "load_scenario", "metrics_csv", "run", "scenario_from_dict",
]
