from likerent.harness.fuzz import FuzzReport, fuzz
from likerent.harness.oracle import comparable, replay_oracle
from likerent.harness.runner import RunReport, World, run_scenario
from likerent.harness.scenario import Step, load_scenario, parse_scenario

__all__ = [
    "FuzzReport",
    "RunReport",
    "Step",
    "World",
    "comparable",
    "fuzz",
    "load_scenario",
    "parse_scenario",
    "replay_oracle",
    "run_scenario",
]
