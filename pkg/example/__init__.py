__all__ = [
    "load_scenario",
    "run_scenario",
    "scenario_path",
    "Simulation",
    "gradient_study",
]

from sphmelt import gradient_study, load_scenario, run_scenario, scenario_path
from sphmelt.runner import Simulation
