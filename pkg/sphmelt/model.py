"""
Configuration records describing a simulation scenario.

All records are immutable pydantic models that reject unknown keys, so a
scenario file with a misspelled key fails at load time instead of being
silently ignored. Values are unit-agnostic: any consistent unit system works.
"""

import math
from enum import IntEnum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

Vector = Tuple[float, ...]


class Phase(IntEnum):
    SOLID = 0
    LIQUID = 1
    GAS = 2
    WALL = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Phase":
        return cls[label.upper()]


PhaseLabel = Literal["solid", "liquid", "gas"]
NumericsPhase = Literal["solid", "liquid", "gas", "wall"]


class Record(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MaterialParams(Record):
    """Constitutive parameters of one material.

    Defaults are representative values for liquid stainless steel near its
    melting point (SI units).
    """

    rho0: float = Field(7430.0, gt=0)
    viscosity: float = Field(6.0e-3, ge=0)
    alpha0: float = Field(1.8, ge=0)
    alpha_slope: float = Field(1.0e-3, ge=0)
    alpha_reference_temperature: float = Field(1700.0, gt=0)
    contact_angle: float = Field(60.0, gt=0, lt=180)
    melt_temperature: float = Field(1700.0, gt=0)
    boiling_temperature: float = Field(3000.0, gt=0)
    heat_capacity: float = Field(965.0, gt=0)
    conductivity: float = Field(35.95, ge=0)
    absorptivity: float = Field(0.5, ge=0, le=1)
    recoil_pressure_constant: float = Field(20.0, ge=0)
    recoil_temperature_constant: float = Field(1.0e5, ge=0)
    evaporation_enthalpy: float = Field(6.0e6, ge=0)
    enthalpy_reference_temperature: float = Field(663.731, ge=0)
    vapor_mass_constant: float = Field(1.0e-3, ge=0)
    sticking_constant: float = Field(1.0, ge=0)

    @model_validator(mode="after")
    def _melt_below_boiling(self) -> "MaterialParams":
        if not self.melt_temperature < self.boiling_temperature:
            raise ValueError(
                f"melt_temperature ({self.melt_temperature}) must be below "
                f"boiling_temperature ({self.boiling_temperature})"
            )
        return self

    @property
    def contact_angle_radians(self) -> float:
        return math.radians(self.contact_angle)


def surface_tension_coefficient(T: Any, mat: Any) -> Any:
    """alpha(T) = alpha0 - alpha'(T - T_alpha0), clamped below at 0.1 alpha0.

    ``mat`` may be a ``MaterialParams`` or any object exposing the same
    attribute names as per-particle arrays.
    """
    excess = np.asarray(T) - mat.alpha_reference_temperature
    alpha = mat.alpha0 - mat.alpha_slope * excess
    out = np.maximum(alpha, 0.1 * np.asarray(mat.alpha0))
    return float(out) if np.ndim(out) == 0 else out


def surface_tension_slope(T: Any, mat: Any) -> Any:
    """d alpha / dT: ``-alpha'`` where the linear law holds, 0 where clamped."""
    excess = np.asarray(T) - mat.alpha_reference_temperature
    alpha = mat.alpha0 - mat.alpha_slope * excess
    active = alpha > 0.1 * np.asarray(mat.alpha0)
    out = np.where(active, -np.asarray(mat.alpha_slope, dtype=np.float64), 0.0)
    return float(out) if np.ndim(out) == 0 else out


class PhaseNumerics(Record):
    p0: float = Field(gt=0)
    pb: float = Field(0.0, ge=0)


class NumericsParams(Record):
    """Discretization and regularization parameters.

    ``h`` equals ``dx``. Optional tolerances default to multiples of ``h``.
    """

    dx: float = Field(gt=0)
    dt: float = Field(gt=0)
    kappa: float = 3.0
    zeta_lg: float = Field(0.0, ge=0)
    zeta_lg_reference_h: Optional[float] = Field(None, gt=0)
    zeta_sl: float = Field(0.0, ge=0)
    t_max: Optional[float] = Field(None, gt=0)
    eps_curv: Optional[float] = Field(None, gt=0)
    eps_visc: float = Field(0.01, gt=0)
    wetting_blend_distance: Optional[float] = Field(None, gt=0)
    interface_sides: Literal["auto", "one", "two"] = "auto"
    phases: Dict[NumericsPhase, PhaseNumerics] = Field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.dx

    @property
    def curvature_tolerance(self) -> float:
        return self.eps_curv if self.eps_curv is not None else 1.0e-4 / self.h

    @property
    def blend_distance(self) -> float:
        if self.wetting_blend_distance is not None:
            return self.wetting_blend_distance
        return self.h

    @property
    def zeta_lg_scaled(self) -> float:
        """Interface viscosity factor scaled linearly with h."""
        if self.zeta_lg_reference_h is None:
            return self.zeta_lg
        return self.zeta_lg * self.h / self.zeta_lg_reference_h


class LaserParams(Record):
    """Gaussian surface heat source moving along a piecewise-linear path."""

    power_density: float = Field(ge=0)
    radius: float = Field(gt=0)
    direction: Vector
    origin: Vector
    velocity: Optional[Vector] = None
    path: List[Tuple[float, Vector]] = Field(default_factory=list)
    schedule: List[Tuple[float, float]] = Field(default_factory=list)

    @field_validator("direction")
    @classmethod
    def _unit_direction(cls, v: Vector) -> Vector:
        norm = math.sqrt(sum(x * x for x in v))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"direction must be a unit vector, got norm {norm:g}")
        return v

    @field_validator("path")
    @classmethod
    def _sorted_path(cls, v: List[Tuple[float, Vector]]) -> List[Tuple[float, Vector]]:
        times = [t for t, _ in v]
        if times != sorted(times):
            raise ValueError("path times must be non-decreasing")
        return v

    @field_validator("schedule")
    @classmethod
    def _ordered_intervals(
        cls, v: List[Tuple[float, float]]
    ) -> List[Tuple[float, float]]:
        for start, end in v:
            if end < start:
                raise ValueError(f"schedule interval [{start}, {end}] is reversed")
        return v

    def center(self, t: float) -> npt.NDArray[np.float64]:
        """Beam center x0(t); constant beyond the ends of the path."""
        if self.path:
            times = np.array([p[0] for p in self.path])
            points = np.array([p[1] for p in self.path], dtype=np.float64)
            return np.array(
                [np.interp(t, times, points[:, k]) for k in range(points.shape[1])]
            )
        base = np.asarray(self.origin, dtype=np.float64)
        if self.velocity is not None:
            return base + t * np.asarray(self.velocity, dtype=np.float64)
        return base

    def is_on(self, t: float) -> bool:
        if not self.schedule:
            return True
        return any(start <= t < end for start, end in self.schedule)


WALL_SIDES = ("x-", "x+", "y-", "y+", "z-", "z+")


class DomainSpec(Record):
    lower: Vector
    upper: Vector
    boundary: List[Literal["wall", "periodic"]]
    wall_mode: Literal["noslip", "freeslip"] = "noslip"
    wall_layers: int = Field(3, ge=1)
    wall_temperature: Optional[float] = Field(None, gt=0)
    wall_temperatures: Dict[str, float] = Field(default_factory=dict)
    wall_velocity: Optional[Vector] = None
    wall_material: Optional[str] = None
    gravity: Optional[Vector] = None

    @field_validator("wall_temperatures")
    @classmethod
    def _known_sides(cls, v: Dict[str, float]) -> Dict[str, float]:
        for side, value in v.items():
            if side not in WALL_SIDES:
                raise ValueError(
                    f"unknown wall side {side!r}, expected one of {WALL_SIDES}"
                )
            if not value > 0:
                raise ValueError(f"wall temperature of side {side} must be > 0")
        return v

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def periodic(self) -> Tuple[bool, ...]:
        return tuple(kind == "periodic" for kind in self.boundary)

    def gravity_vector(self) -> npt.NDArray[np.float64]:
        if self.gravity is None:
            return np.zeros(self.dimension)
        return np.asarray(self.gravity, dtype=np.float64)

    def wall_velocity_vector(self) -> npt.NDArray[np.float64]:
        if self.wall_velocity is None:
            return np.zeros(self.dimension)
        return np.asarray(self.wall_velocity, dtype=np.float64)


class RegionBase(Record):
    phase: PhaseLabel
    material: str
    temperature: Optional[float] = Field(None, gt=0)

    def contains(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        raise NotImplementedError


class BlockRegion(RegionBase):
    """Axis-aligned box, half-open ``[lower, upper)``."""

    shape: Literal["block"]
    lower: Vector
    upper: Vector

    def contains(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((points >= lo) & (points < hi), axis=1)


class BallRegion(RegionBase):
    shape: Literal["disc", "sphere"]
    center: Vector
    radius: float = Field(gt=0)

    def contains(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        d = points - np.asarray(self.center)
        return np.einsum("ij,ij->i", d, d) < self.radius**2


class EllipseRegion(RegionBase):
    shape: Literal["ellipse"]
    center: Vector
    semiaxes: Vector

    def contains(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        scaled = (points - np.asarray(self.center)) / np.asarray(self.semiaxes)
        return np.einsum("ij,ij->i", scaled, scaled) < 1.0


class PowderRegion(RegionBase):
    """Fixed spherical grains resting on a substrate.

    Grains are either listed explicitly (``spheres`` as center + radius rows)
    or drawn from ``count``, a diameter range and a seed inside the lateral
    ``footprint``; drawn grains rest on the plane ``base`` of the last axis.
    """

    shape: Literal["powder"]
    phase: PhaseLabel = "solid"
    spheres: List[Vector] = Field(default_factory=list)
    count: int = Field(0, ge=0)
    diameter_min: Optional[float] = Field(None, gt=0)
    diameter_max: Optional[float] = Field(None, gt=0)
    footprint_lower: Optional[Vector] = None
    footprint_upper: Optional[Vector] = None
    base: float = 0.0
    seed: int = 0

    @model_validator(mode="after")
    def _generation_inputs(self) -> "PowderRegion":
        if self.count:
            missing = [
                name
                for name in (
                    "diameter_min",
                    "diameter_max",
                    "footprint_lower",
                    "footprint_upper",
                )
                if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"count > 0 requires {', '.join(missing)}")
            assert self.diameter_min is not None and self.diameter_max is not None
            if self.diameter_max < self.diameter_min:
                raise ValueError("diameter_max must be >= diameter_min")
        return self

    def grains(self, dimension: int) -> npt.NDArray[np.float64]:
        """(n, d + 1) array of grain centers and radii."""
        rows = [np.asarray(s, dtype=np.float64) for s in self.spheres]
        for row in rows:
            if row.shape != (dimension + 1,):
                raise ValueError(
                    f"powder sphere rows need {dimension + 1} values, "
                    f"got {row.shape[0]}"
                )
        if self.count:
            rng = np.random.default_rng(self.seed)
            assert self.footprint_lower is not None and self.footprint_upper is not None
            lo = np.asarray(self.footprint_lower, dtype=np.float64)
            hi = np.asarray(self.footprint_upper, dtype=np.float64)
            radii = 0.5 * rng.uniform(self.diameter_min, self.diameter_max, self.count)
            lateral = rng.uniform(lo, hi, size=(self.count, lo.shape[0]))
            heights = self.base + radii
            rows.extend(
                np.concatenate([lateral, heights[:, None], radii[:, None]], axis=1)
            )
        if not rows:
            return np.zeros((0, dimension + 1))
        return np.vstack(rows)

    def contains(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
        grains = self.grains(points.shape[1])
        inside = np.zeros(points.shape[0], dtype=bool)
        for row in grains:
            d = points - row[:-1]
            inside |= np.einsum("ij,ij->i", d, d) < row[-1] ** 2
        return inside


Region = Annotated[
    Union[BlockRegion, BallRegion, EllipseRegion, PowderRegion],
    Field(discriminator="shape"),
]


class FillSpec(Record):
    phase: PhaseLabel
    material: str


class TemperatureSpec(Record):
    initial: float = Field(gt=0)
    gradient: Optional[Vector] = None


class Ramp(Record):
    """Linear ramp of a scale factor between two times."""

    start: float = 0.0
    end: float
    start_value: float = 0.0
    end_value: float = 1.0

    @model_validator(mode="after")
    def _ordered(self) -> "Ramp":
        if self.end < self.start:
            raise ValueError(f"ramp end ({self.end}) is before start ({self.start})")
        return self

    def factor(self, t: float) -> float:
        if t < self.start:
            return self.start_value
        if t >= self.end:
            return self.end_value
        w = (t - self.start) / (self.end - self.start)
        return self.start_value + w * (self.end_value - self.start_value)


RampTarget = Literal[
    "surface_tension", "marangoni", "wetting", "recoil", "viscosity", "laser"
]


class PhysicsSwitches(Record):
    pressure: bool = True
    viscosity: bool = True
    density: bool = True
    transport_velocity: bool = True
    surface_tension: bool = True
    marangoni: bool = True
    wetting: bool = True
    recoil: bool = True
    interface_viscosity: bool = True
    conduction: bool = True
    laser: bool = True
    evaporation: bool = True
    phase_change: bool = True


class OutputSpec(Record):
    interval: Optional[float] = Field(None, gt=0)
    formats: List[Literal["csv", "vtk"]] = Field(default_factory=lambda: ["csv"])
    diagnostics: bool = False


class ScenarioMeta(Record):
    name: str = Field(min_length=1)
    dimension: Literal[1, 2, 3]
    end_time: float = Field(gt=0)
    seed: int = 0


class ScenarioConfig(Record):
    scenario: ScenarioMeta
    domain: DomainSpec
    numerics: NumericsParams
    materials: Dict[str, MaterialParams]
    fill: FillSpec
    regions: Dict[str, Region] = Field(default_factory=dict)
    temperature: TemperatureSpec
    laser: Optional[LaserParams] = None
    ramps: Dict[RampTarget, Ramp] = Field(default_factory=dict)
    physics: PhysicsSwitches = Field(default_factory=PhysicsSwitches)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @property
    def dimension(self) -> int:
        return int(self.scenario.dimension)

    @property
    def material_names(self) -> List[str]:
        return list(self.materials)

    def material_id(self, name: str) -> int:
        return self.material_names.index(name)

    @property
    def wall_material(self) -> str:
        return self.domain.wall_material or self.fill.material

    def phase_numerics(self, phase: Phase) -> PhaseNumerics:
        """Numerics of a phase; wall falls back to the fill phase, solid to liquid."""
        phases = self.numerics.phases
        if phase.label in phases:
            return phases[phase.label]  # type: ignore[index]
        if phase is Phase.WALL:
            return self.phase_numerics(Phase.from_label(self.fill.phase))
        if phase is Phase.SOLID and "liquid" in phases:
            return phases["liquid"]
        raise KeyError(f"No numerics given for phase {phase.label}")

    def ramp_factor(self, target: str, t: float) -> float:
        ramp = self.ramps.get(target)  # type: ignore[call-overload]
        return 1.0 if ramp is None else ramp.factor(t)
