"""specmine: mining past-time LTL task specifications from demonstrations."""

from specmine import concepts, gridworld, inference, planner, pltl, pool, scenario, transfer
from specmine.gridworld import load_world
from specmine.inference import rank_specs
from specmine.planner import plan_satisfying_trace
from specmine.pltl import evaluate, parse_formula
from specmine.scenario import load_scenario
from specmine.transfer import run_transfer_protocol

__all__ = [
    "concepts",
    "gridworld",
    "inference",
    "planner",
    "pltl",
    "pool",
    "scenario",
    "transfer",
    "load_world",
    "rank_specs",
    "plan_satisfying_trace",
    "evaluate",
    "parse_formula",
    "load_scenario",
    "run_transfer_protocol",
]
