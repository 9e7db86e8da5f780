"""
Pytest configuration and shared fixtures for sphmelt tests.

Provides lattice builders, the stainless steel and gas materials used by
the melt scenarios, and a small static droplet scenario that runs in well
under a second.
"""

from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from sphmelt.kernel import KernelSpec
from sphmelt.model import MaterialParams, Phase
from sphmelt.neighbors import FloatArray, PairList, build_index
from sphmelt.particles import ParticleSet

# Configure pytest-asyncio
pytest_plugins = ("pytest_asyncio",)


def lattice(counts: Sequence[int], dx: float = 1.0) -> FloatArray:
    """Integer-indexed lattice points ``k * dx`` centred on the origin."""
    axes = [(np.arange(n) - (n - 1) / 2.0) * dx for n in counts]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def pairs_for(
    positions: FloatArray,
    spec: KernelSpec,
    periodic: Optional[Sequence[bool]] = None,
    lower: Optional[Sequence[float]] = None,
    upper: Optional[Sequence[float]] = None,
) -> PairList:
    pad = spec.radius + spec.h
    lo = positions.min(axis=0) - pad if lower is None else np.asarray(lower)
    hi = positions.max(axis=0) + pad if upper is None else np.asarray(upper)
    return build_index(positions, spec.radius, lo, hi, periodic).pairs()


def index_of(positions: FloatArray, point: Sequence[float]) -> int:
    distance = np.linalg.norm(positions - np.asarray(point), axis=1)
    return int(np.argmin(distance))


STEEL = MaterialParams()
GAS = MaterialParams(
    rho0=74.3,
    viscosity=6.0e-4,
    heat_capacity=10.0,
    conductivity=0.026,
    absorptivity=0.0,
)


@pytest.fixture
def steel() -> MaterialParams:
    return STEEL


@pytest.fixture
def gas() -> MaterialParams:
    return GAS


@pytest.fixture
def spec() -> KernelSpec:
    return KernelSpec(h=1.0, dimension=2)


def two_phase(
    positions: FloatArray,
    liquid: np.ndarray,
    dx: float = 1.0,
    materials: Sequence[MaterialParams] = (STEEL, STEEL),
) -> ParticleSet:
    """Liquid where ``liquid`` is set, gas elsewhere; one material per phase."""
    phase = np.where(liquid, int(Phase.LIQUID), int(Phase.GAS))
    material = np.where(liquid, 0, 1)
    return ParticleSet.from_arrays(
        positions,
        phase=phase,
        material=material,
        materials=list(materials),
        smoothing_length=dx,
    )


@pytest.fixture
def make_two_phase() -> Callable[..., ParticleSet]:
    return two_phase


DROPLET_SCENARIO = """
[scenario]
name = tiny_droplet
dimension = 2
end_time = 1.0e-3

[domain]
lower = [0.0, 0.0]
upper = [2.4, 2.4]
boundary = ["periodic", "wall"]

[numerics]
dx = 0.1
dt = 1.0e-5

[phase.liquid]
p0 = 1.0e4

[phase.gas]
p0 = 2.0e4

[material.fluid1]
rho0 = 0.25
viscosity = 0.1
alpha0 = 1.0
alpha_slope = 0.0
alpha_reference_temperature = 290.0
conductivity = 1.0
heat_capacity = 50.0

[material.fluid2]
rho0 = 0.5
viscosity = 0.2
alpha0 = 1.0
alpha_slope = 0.0
alpha_reference_temperature = 290.0
conductivity = 2.0
heat_capacity = 100.0

[fill]
phase = gas
material = fluid2

[region.drop]
shape = disc
phase = liquid
material = fluid1
center = [1.2, 1.2]
radius = 0.6

[temperature]
initial = 290.0

[physics]
phase_change = false
recoil = false
evaporation = false
laser = false
wetting = false
interface_viscosity = false

[output]
interval = 2.0e-5
"""


@pytest.fixture
def droplet_text() -> str:
    return DROPLET_SCENARIO


@pytest.fixture
def droplet_file(tmp_path: Path) -> Path:
    path = tmp_path / "tiny_droplet.cfg"
    path.write_text(DROPLET_SCENARIO, encoding="utf-8")
    return path
