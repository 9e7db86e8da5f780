"""
Particle state and lattice initialization.

``ParticleSet`` is a structure of arrays holding every particle of a run:
fluid (liquid, gas), solid and wall particles. Masses never change after
initialization; solid and wall particles never move.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from sphmelt.model import MaterialParams, Phase, ScenarioConfig
from sphmelt.neighbors import BoolArray, FloatArray, IntArray
from sphmelt.validation import ValidationError, error_msg

logger = logging.getLogger(__name__)


@dataclass
class MaterialView:
    """Per-particle material parameters, one array per ``MaterialParams`` field."""

    rho0: FloatArray
    viscosity: FloatArray
    alpha0: FloatArray
    alpha_slope: FloatArray
    alpha_reference_temperature: FloatArray
    contact_angle: FloatArray
    melt_temperature: FloatArray
    boiling_temperature: FloatArray
    heat_capacity: FloatArray
    conductivity: FloatArray
    absorptivity: FloatArray
    recoil_pressure_constant: FloatArray
    recoil_temperature_constant: FloatArray
    evaporation_enthalpy: FloatArray
    enthalpy_reference_temperature: FloatArray
    vapor_mass_constant: FloatArray
    sticking_constant: FloatArray

    @classmethod
    def from_records(
        cls, records: Sequence[MaterialParams], ids: IntArray
    ) -> "MaterialView":
        columns: Dict[str, FloatArray] = {}
        for f in fields(cls):
            table = np.array([getattr(m, f.name) for m in records], dtype=np.float64)
            columns[f.name] = table[ids] if len(records) else np.zeros(len(ids))
        return cls(**columns)


@dataclass
class ParticleSet:
    position: FloatArray
    velocity: FloatArray
    transport_velocity: FloatArray
    acceleration: FloatArray
    background_acceleration: FloatArray
    density: FloatArray
    pressure: FloatArray
    temperature: FloatArray
    temperature_rate: FloatArray
    mass: FloatArray
    smoothing_length: FloatArray
    phase: IntArray
    material: IntArray
    reference_pressure: FloatArray
    background_pressure: FloatArray
    ghost_velocity: FloatArray
    wall_velocity: FloatArray
    wall_normal: FloatArray
    initial_phase: IntArray
    melted: BoolArray
    materials: List[MaterialParams] = field(default_factory=list)
    props: Optional[MaterialView] = None

    def __post_init__(self) -> None:
        if self.props is None:
            self.props = MaterialView.from_records(self.materials, self.material)

    def __len__(self) -> int:
        return int(self.position.shape[0])

    @classmethod
    def from_arrays(
        cls,
        position: npt.ArrayLike,
        *,
        velocity: Optional[npt.ArrayLike] = None,
        mass: Optional[npt.ArrayLike] = None,
        density: Optional[npt.ArrayLike] = None,
        temperature: Optional[npt.ArrayLike] = None,
        phase: Optional[npt.ArrayLike] = None,
        material: Optional[npt.ArrayLike] = None,
        materials: Optional[Sequence[MaterialParams]] = None,
        smoothing_length: float = 1.0,
        reference_pressure: float = 1.0,
        background_pressure: float = 0.0,
    ) -> "ParticleSet":
        """Build a particle set from raw arrays; unset fields take neutral values."""
        pos = np.array(position, dtype=np.float64, ndmin=2)
        n, d = pos.shape
        records = list(materials) if materials is not None else [MaterialParams()]
        ids = (
            np.zeros(n, dtype=np.int64)
            if material is None
            else np.asarray(material, dtype=np.int64)
        )
        rho0 = np.array([m.rho0 for m in records])[ids]

        def vector(values: Optional[npt.ArrayLike]) -> FloatArray:
            if values is None:
                return np.zeros((n, d))
            return np.array(values, dtype=np.float64).reshape(n, d)

        def scalar(values: Optional[npt.ArrayLike], default: Any) -> FloatArray:
            if values is None:
                base = np.asarray(default, dtype=np.float64)
                return np.broadcast_to(base, (n,)).copy()
            return np.array(values, dtype=np.float64).reshape(n)

        labels = (
            np.full(n, int(Phase.LIQUID), dtype=np.int64)
            if phase is None
            else np.asarray(phase, dtype=np.int64).copy()
        )
        u = vector(velocity)
        return cls(
            position=pos,
            velocity=u,
            transport_velocity=u.copy(),
            acceleration=np.zeros((n, d)),
            background_acceleration=np.zeros((n, d)),
            density=scalar(density, rho0),
            pressure=np.zeros(n),
            temperature=scalar(temperature, 300.0),
            temperature_rate=np.zeros(n),
            mass=scalar(mass, rho0 * smoothing_length**d),
            smoothing_length=np.full(n, float(smoothing_length)),
            phase=labels,
            material=ids,
            reference_pressure=np.full(n, float(reference_pressure)),
            background_pressure=np.full(n, float(background_pressure)),
            ghost_velocity=np.zeros((n, d)),
            wall_velocity=np.zeros((n, d)),
            wall_normal=np.zeros((n, d)),
            initial_phase=labels.copy(),
            melted=np.zeros(n, dtype=bool),
            materials=records,
        )

    @property
    def dimension(self) -> int:
        return int(self.position.shape[1])

    @property
    def volume(self) -> FloatArray:
        return self.mass / self.density

    @property
    def sound_speed(self) -> FloatArray:
        assert self.props is not None
        return np.sqrt(self.reference_pressure / self.props.rho0)

    def mask(self, *phases: Phase) -> BoolArray:
        return np.isin(self.phase, [int(p) for p in phases])

    @property
    def fluid(self) -> BoolArray:
        return self.mask(Phase.LIQUID, Phase.GAS)

    @property
    def rigid(self) -> BoolArray:
        return self.mask(Phase.SOLID, Phase.WALL)

    def total_mass(self) -> float:
        return float(self.mass.sum())

    def copy(self) -> "ParticleSet":
        arrays = {
            f.name: getattr(self, f.name).copy()
            for f in fields(self)
            if isinstance(getattr(self, f.name), np.ndarray)
        }
        return replace(self, materials=list(self.materials), props=None, **arrays)


def phase_update(
    particles: ParticleSet, config: Optional[ScenarioConfig] = None
) -> int:
    """Melt solid particles above T_m and freeze liquid ones below it.

    Frozen particles keep their position and lose all velocity. Gas and wall
    particles never change. With a ``config``, changed particles take the
    reference and background pressure of their new phase. Returns the number
    of particles that changed.
    """
    assert particles.props is not None
    T = particles.temperature
    T_m = particles.props.melt_temperature
    melting = (particles.phase == Phase.SOLID) & (T > T_m)
    freezing = (particles.phase == Phase.LIQUID) & (T < T_m)
    particles.phase[melting] = Phase.LIQUID
    particles.melted[melting] = True
    particles.phase[freezing] = Phase.SOLID
    for arr in (
        particles.velocity,
        particles.transport_velocity,
        particles.acceleration,
        particles.background_acceleration,
    ):
        arr[freezing] = 0.0
    if config is not None:
        for label, sel in ((Phase.LIQUID, melting), (Phase.SOLID, freezing)):
            if np.any(sel):
                numerics = config.phase_numerics(label)
                particles.reference_pressure[sel] = numerics.p0
                particles.background_pressure[sel] = numerics.pb
    changed = int(np.count_nonzero(melting) + np.count_nonzero(freezing))
    if changed:
        logger.debug(
            "Phase update: %d melted, %d solidified",
            int(np.count_nonzero(melting)),
            int(np.count_nonzero(freezing)),
        )
    return changed


def _lattice(config: ScenarioConfig) -> FloatArray:
    domain = config.domain
    dx = config.numerics.dx
    layers = domain.wall_layers
    axes = []
    for axis, (lo, hi) in enumerate(zip(domain.lower, domain.upper)):
        cells = int(round((hi - lo) / dx))
        first, last = (0, cells) if domain.periodic[axis] else (-layers, cells + layers)
        axes.append(lo + (np.arange(first, last) + 0.5) * dx)
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def _wall_temperature(
    config: ScenarioConfig,
    points: FloatArray,
    outside_low: BoolArray,
    outside_high: BoolArray,
) -> FloatArray:
    domain = config.domain
    T = _temperature_field(config, points)
    if domain.wall_temperature is not None:
        T[:] = domain.wall_temperature
    for axis, name in enumerate("xyz"[: config.dimension]):
        for side, outside in ((f"{name}-", outside_low), (f"{name}+", outside_high)):
            if side in domain.wall_temperatures:
                T[outside[:, axis]] = domain.wall_temperatures[side]
    return T


def _temperature_field(config: ScenarioConfig, points: FloatArray) -> FloatArray:
    spec = config.temperature
    T = np.full(points.shape[0], spec.initial)
    if spec.gradient is not None:
        offset = points - np.asarray(config.domain.lower)
        T += offset @ np.asarray(spec.gradient, dtype=np.float64)
    return T


def initialize_particles(config: ScenarioConfig) -> ParticleSet:
    """Fill the domain with a regular lattice of particles at rest.

    Every lattice site inside the domain takes the fill phase unless a region
    claims it; sites beyond non-periodic bounds become wall particles
    (``domain.wall_layers`` layers).

    Raises:
        ValidationError: Two regions claim the same lattice site.
    """
    domain = config.domain
    dx = config.numerics.dx
    d = config.dimension
    points = _lattice(config)
    n = points.shape[0]
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    outside_low = points < lower
    outside_high = points >= upper
    wall = np.any(outside_low | outside_high, axis=1)

    phase = np.full(n, int(Phase.from_label(config.fill.phase)), dtype=np.int64)
    material = np.full(n, config.material_id(config.fill.material), dtype=np.int64)
    claimed = np.zeros(n, dtype=np.int64)
    owner: List[str] = []
    heated: List[Tuple[BoolArray, float]] = []
    inside = ~wall
    for name, region in config.regions.items():
        hit = region.contains(points) & inside
        if region.temperature is not None:
            heated.append((hit, region.temperature))
        claimed += hit
        phase[hit] = int(Phase.from_label(region.phase))
        material[hit] = config.material_id(region.material)
        owner.append(name)
    if np.any(claimed > 1):
        count = int(np.count_nonzero(claimed > 1))
        raise ValidationError(
            error_msg(
                "region",
                f"regions {', '.join(owner)} overlap at {count} lattice sites",
            )
        )
    phase[wall] = int(Phase.WALL)
    material[wall] = config.material_id(config.wall_material)

    records = [config.materials[name] for name in config.material_names]
    rho0 = np.array([m.rho0 for m in records])[material]
    p0 = np.empty(n)
    pb = np.empty(n)
    for label in Phase:
        sel = phase == label
        if np.any(sel):
            numerics = config.phase_numerics(label)
            p0[sel] = numerics.p0
            pb[sel] = numerics.pb

    temperature = _temperature_field(config, points)
    for hit, value in heated:
        temperature[hit] = value
    walls = _wall_temperature(config, points, outside_low, outside_high)
    temperature[wall] = walls[wall]

    normal = np.where(outside_low, 1.0, 0.0) - np.where(outside_high, 1.0, 0.0)
    norm = np.linalg.norm(normal, axis=1)
    normal[norm > 0] /= norm[norm > 0, None]

    wall_velocity = np.zeros((n, d))
    wall_velocity[wall] = domain.wall_velocity_vector()

    particles = ParticleSet(
        position=points,
        velocity=np.zeros((n, d)),
        transport_velocity=np.zeros((n, d)),
        acceleration=np.zeros((n, d)),
        background_acceleration=np.zeros((n, d)),
        density=rho0.copy(),
        pressure=np.zeros(n),
        temperature=temperature,
        temperature_rate=np.zeros(n),
        mass=rho0 * dx**d,
        smoothing_length=np.full(n, dx),
        phase=phase,
        material=material,
        reference_pressure=p0,
        background_pressure=pb,
        ghost_velocity=wall_velocity.copy(),
        wall_velocity=wall_velocity,
        wall_normal=normal,
        initial_phase=phase.copy(),
        melted=np.zeros(n, dtype=bool),
        materials=records,
    )
    logger.info("Initialized %d particles %s", n, phase_counts(particles))
    return particles


def phase_counts(particles: ParticleSet) -> Dict[str, int]:
    return {p.label: int(np.count_nonzero(particles.phase == p)) for p in Phase}

