"""
sphmelt - weakly compressible SPH for thermo-capillary melt pools.

The package simulates liquid, gas and solid particles with surface tension,
Marangoni and wetting forces, recoil pressure, heat conduction, laser heating,
evaporation and solid-liquid phase change. Scenarios are INI files validated
into pydantic records; runs write CSV or legacy VTK snapshots.

Key Components:
- ScenarioConfig: validated scenario description
- ParticleSet: particle state arrays and per-particle material view
- MeltPoolModel: the assembled force and heat model
- Simulation: time loop, snapshots and diagnostics of one run
- run_benchmark: shipped benchmark scenarios with their observables
- gradient_study: accuracy comparison of the SPH gradient variants

Examples:
    Run a shipped scenario for a few steps:
    ```python
    from sphmelt import load_scenario, run_scenario, scenario_path

    config = load_scenario(scenario_path("static_droplet"))
    result = run_scenario(config, "out/static_droplet", max_steps=10)
    print(result.steps, result.time)
    ```

    Coarsen a benchmark and read its observables:
    ```python
    from sphmelt import run_benchmark

    report = run_benchmark("oscillation", resolution_scale=3)
    print(report.observables["period"])
    ```
"""

# Kernel and neighbor search
from .kernel import (
    GradientVariant,
    KernelDomainError,
    KernelSpec,
    gradient_field,
    kernel_derivative,
    kernel_value,
)
from .neighbors import NeighborIndex, OutOfDomainError, PairList, build_index

# Configuration records and particle state
from .model import MaterialParams, Phase, ScenarioConfig
from .particles import ParticleSet, initialize_particles, phase_update

# Physics model and time stepping
from .integrator import (
    Integrator,
    SimulationDiverged,
    StepReport,
    kick_drift_kick,
    stable_dt,
)
from .solver import MeltPoolModel

# Scenario files and outputs
from .scenario import load_scenario, scale_resolution, scenario_names, scenario_path
from .snapshot import SnapshotError, read_snapshot_csv, write_snapshot

# Drivers
from .runner import RunResult, Simulation, run_batch, run_scenario
from .bench import (
    BenchmarkReport,
    migration_groups,
    rayleigh_period,
    run_benchmark,
    run_benchmarks,
)
from .gradlab import GradlabConfig, gradient_study, load_gradlab

# Validation utilities
from .validation import ValidationError, scenario_check

__all__ = [
    # Kernel and neighbor search
    "KernelSpec",
    "kernel_value",
    "kernel_derivative",
    "gradient_field",
    "GradientVariant",
    "NeighborIndex",
    "PairList",
    "build_index",
    # Configuration and state
    "ScenarioConfig",
    "MaterialParams",
    "Phase",
    "ParticleSet",
    "initialize_particles",
    "phase_update",
    # Model and stepping
    "MeltPoolModel",
    "Integrator",
    "StepReport",
    "kick_drift_kick",
    "stable_dt",
    # Scenarios and outputs
    "load_scenario",
    "scale_resolution",
    "scenario_names",
    "scenario_path",
    "write_snapshot",
    "read_snapshot_csv",
    # Drivers
    "Simulation",
    "RunResult",
    "run_scenario",
    "run_batch",
    "BenchmarkReport",
    "run_benchmark",
    "run_benchmarks",
    "migration_groups",
    "rayleigh_period",
    "GradlabConfig",
    "load_gradlab",
    "gradient_study",
    # Validation
    "ValidationError",
    "scenario_check",
    # Exceptions
    "KernelDomainError",
    "OutOfDomainError",
    "SimulationDiverged",
    "SnapshotError",
]
