# ruff: noqa
# mypy: ignore-errors
"""
Static droplet at a coarse resolution.

Loads the shipped scenario, coarsens it with overrides, takes a few steps
and prints the measured pressure jump next to alpha0 / R.
"""

from sphmelt import load_scenario, scenario_path
from sphmelt.bench import centre_pressure_jump
from sphmelt.runner import Simulation

# =============================================================================
# 1. Load and patch a shipped scenario
# =============================================================================

OVERRIDES = [
    "numerics.dx=0.18",
    "numerics.dt=1e-5",
    "output.diagnostics=false",
]


def build_simulation() -> Simulation:
    config = load_scenario(scenario_path("static_droplet"), OVERRIDES)
    return Simulation(config)


# =============================================================================
# 2. Step and measure
# =============================================================================


def measure(simulation: Simulation, steps: int) -> dict:
    result = simulation.run(max_steps=steps)
    values = centre_pressure_jump(simulation.particles, simulation.model)
    alpha = simulation.config.materials["fluid1"].alpha0
    values["expected"] = alpha / values["radius"]
    values["steps"] = result.steps
    return values


def main() -> None:
    print("sphmelt - static droplet example")
    print("=" * 50)
    simulation = build_simulation()
    print(f"Particles: {len(simulation.particles)}")
    values = measure(simulation, steps=5)
    print(f"Steps taken:        {values['steps']}")
    print(f"Drop radius:        {values['radius']:.4f}")
    print(f"Pressure jump:      {values['pressure_jump']:.1f}")
    print(f"alpha0 / R:         {values['expected']:.1f}")


if __name__ == "__main__":
    main()
