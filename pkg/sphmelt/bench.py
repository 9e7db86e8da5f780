"""
Benchmark drivers.

Each benchmark runs a shipped scenario with observers attached and reduces
what they saw to scalar observables and time series, written as
``report.json`` next to the snapshots.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import anyio
import numpy as np
import orjson

from sphmelt.kernel import kernel_value
from sphmelt.model import BallRegion, EllipseRegion, Phase, ScenarioConfig
from sphmelt.neighbors import FloatArray
from sphmelt.particles import ParticleSet
from sphmelt.runner import Simulation, run_batch
from sphmelt.scenario import load_scenario, scale_resolution, scenario_path
from sphmelt.solver import MeltPoolModel

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
OSCILLATION_REFERENCE_PERIOD = 0.179e-3

Summary = Tuple[Dict[str, float], Dict[str, List[float]]]


@dataclass
class BenchmarkReport:
    name: str
    scenario: str
    status: str
    steps: int
    time: float
    resolution_scale: float = 1.0
    observables: Dict[str, float] = field(default_factory=dict)
    series: Dict[str, List[float]] = field(default_factory=dict)
    failure_step: Optional[int] = None
    message: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(
            orjson.dumps(
                self.as_dict(),
                option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY,
            )
        )
        return target


# Reference quantities


def rayleigh_period(
    radius: float, rho: float, alpha: float, dimension: int = 2
) -> float:
    """Small-amplitude period of the lowest (n = 2) shape mode of a free drop.

    2D: 2 pi sqrt(R^3 rho / (6 alpha)); 3D: 2 pi sqrt(R^3 rho / (8 alpha)).
    """
    modes = {2: 6.0, 3: 8.0}
    if dimension not in modes:
        raise ValueError(f"Oscillation period needs dimension 2 or 3, got {dimension}")
    return 2.0 * math.pi * math.sqrt(radius**3 * rho / (modes[dimension] * alpha))


def _droplet(config: ScenarioConfig) -> Union[BallRegion, EllipseRegion]:
    for region in config.regions.values():
        if isinstance(region, (BallRegion, EllipseRegion)) and region.phase == "liquid":
            return region
    raise ValueError(f"Scenario {config.scenario.name} has no liquid droplet region")


def migration_groups(config: ScenarioConfig) -> Dict[str, float]:
    """Reference velocity, time and dimensionless groups of a migrating drop.

    U_r = alpha' |grad T| a / mu_2 with the surrounding fluid 2 (the fill
    material); Re = rho_2 U_r a / mu_2, Ma = U_r a rho_2 c_p2 / k_2 and
    Ca = U_r mu_2 / alpha_0 of the drop.
    """
    drop = _droplet(config)
    if not isinstance(drop, BallRegion):
        raise ValueError("Migration groups need a circular droplet")
    if config.temperature.gradient is None:
        raise ValueError("Migration groups need a temperature gradient")
    a = drop.radius
    liquid = config.materials[drop.material]
    outer = config.materials[config.fill.material]
    grad_T = float(np.linalg.norm(config.temperature.gradient))
    u_ref = liquid.alpha_slope * grad_T * a / outer.viscosity
    return {
        "U_r": u_ref,
        "t_r": a / u_ref,
        "Re": outer.rho0 * u_ref * a / outer.viscosity,
        "Ma": u_ref * a * outer.rho0 * outer.heat_capacity / outer.conductivity,
        "Ca": u_ref * outer.viscosity / liquid.alpha0,
    }


def oscillation_period(times: Sequence[float], signal: Sequence[float]) -> float:
    """First full period of ``signal`` from its zero crossings (nan if too short).

    Three crossings give the period directly; two give twice their spacing.
    """
    t = np.asarray(times, dtype=np.float64)
    s = np.asarray(signal, dtype=np.float64)
    crossings: List[float] = []
    for k in range(len(s) - 1):
        a, b = s[k], s[k + 1]
        if a == 0.0 and k == 0:
            continue
        if a * b < 0.0 or (b == 0.0 and a != 0.0):
            crossings.append(float(t[k] + (t[k + 1] - t[k]) * a / (a - b)))
    if len(crossings) >= 3:
        return crossings[2] - crossings[0]
    if len(crossings) == 2:
        return 2.0 * (crossings[1] - crossings[0])
    return math.nan


# Measurements


def _centroid(particles: ParticleSet, mask: np.ndarray) -> FloatArray:
    m = particles.mass[mask]
    return (particles.position[mask] * m[:, None]).sum(axis=0) / m.sum()


def equivalent_radius(particles: ParticleSet, phase: Phase = Phase.LIQUID) -> float:
    """Radius of the disc (2D) or sphere (3D) with the volume of ``phase``."""
    volume = float(particles.volume[particles.phase == phase].sum())
    if particles.dimension == 2:
        return math.sqrt(volume / math.pi)
    if particles.dimension == 3:
        return (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)
    return 0.5 * volume


def centre_pressure_jump(
    particles: ParticleSet, model: MeltPoolModel
) -> Dict[str, float]:
    """Kernel-smoothed pressure at the drop centre minus the far-field mean.

    The far field holds gas particles farther than the drop radius plus two
    kernel radii from the centre.
    """
    liquid = particles.phase == Phase.LIQUID
    gas = particles.phase == Phase.GAS
    centre = _centroid(particles, liquid)
    distance = np.linalg.norm(particles.position - centre, axis=1)
    spec = model.spec
    near = particles.fluid & (distance < spec.radius)
    w = kernel_value(distance[near], spec) * particles.volume[near]
    p_centre = float((w * particles.pressure[near]).sum() / w.sum())
    radius = equivalent_radius(particles)
    far = gas & (distance > radius + 2.0 * spec.radius)
    p_far = float(particles.pressure[far].mean()) if np.any(far) else 0.0
    return {
        "centre_pressure": p_centre,
        "far_pressure": p_far,
        "pressure_jump": p_centre - p_far,
        "radius": radius,
    }


def band_velocity_variance(particles: ParticleSet, model: MeltPoolModel) -> float:
    """Variance of the speed of fluid particles inside the lg interface band."""
    band = particles.fluid & (model.interface_fields().lg.delta > 0)
    if not np.any(band):
        return 0.0
    return float(np.var(np.linalg.norm(particles.velocity[band], axis=1)))


# Observers


class SeriesObserver:
    """Samples every ``every``-th call into named time series."""

    def __init__(self, every: int = 1) -> None:
        self.every = max(1, every)
        self.calls = 0
        self.series: Dict[str, List[float]] = {"t": []}

    def __call__(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> None:
        if self.calls % self.every == 0:
            self.series["t"].append(time)
            for name, value in self.sample(time, particles, model).items():
                self.series.setdefault(name, []).append(value)
        self.calls += 1

    def sample(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> Dict[str, float]:
        return {}

    def summary(self, particles: ParticleSet, model: MeltPoolModel) -> Summary:
        return {}, self.series


class PressureJumpObserver(SeriesObserver):
    """Static drop: pressure jump across the interface against alpha / R."""

    def __init__(self, config: ScenarioConfig, every: int = 1) -> None:
        super().__init__(every)
        drop = _droplet(config)
        self.alpha = config.materials[drop.material].alpha0

    def sample(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> Dict[str, float]:
        jump = centre_pressure_jump(particles, model)
        return {"pressure_jump": jump["pressure_jump"]}

    def summary(self, particles: ParticleSet, model: MeltPoolModel) -> Summary:
        values = centre_pressure_jump(particles, model)
        expected = self.alpha / values["radius"]
        values["expected_pressure_jump"] = expected
        values["relative_error"] = abs(values["pressure_jump"] - expected) / expected
        return values, self.series


class MigrationObserver(SeriesObserver):
    """Drop centroid velocity along the temperature gradient, in reference units."""

    def __init__(self, config: ScenarioConfig, every: int = 1) -> None:
        super().__init__(every)
        self.groups = migration_groups(config)
        gradient = np.asarray(config.temperature.gradient, dtype=np.float64)
        self.direction = gradient / np.linalg.norm(gradient)

    def sample(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> Dict[str, float]:
        liquid = particles.phase == Phase.LIQUID
        m = particles.mass[liquid]
        u = (particles.velocity[liquid] * m[:, None]).sum(axis=0) / m.sum()
        return {
            "t_over_t_r": time / self.groups["t_r"],
            "U_over_U_r": float(u @ self.direction) / self.groups["U_r"],
        }

    def summary(self, particles: ParticleSet, model: MeltPoolModel) -> Summary:
        velocity = np.asarray(self.series.get("U_over_U_r", []))
        values = dict(self.groups)
        if velocity.size:
            values["final_U_over_U_r"] = float(velocity[-1])
            values["rising"] = float(np.all(velocity[1:] > 0.0))
        return values, self.series


class OscillationObserver(SeriesObserver):
    """Drop length along the first axis and the period of its oscillation."""

    def __init__(self, config: ScenarioConfig, every: int = 1) -> None:
        super().__init__(every)
        drop = _droplet(config)
        self.material = config.materials[drop.material]
        self.dx = config.numerics.dx
        self.radius: Optional[float] = None

    def sample(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> Dict[str, float]:
        liquid = particles.phase == Phase.LIQUID
        x = particles.position[liquid, 0]
        if self.radius is None:
            self.radius = equivalent_radius(particles)
        return {"length": float(x.max() - x.min() + self.dx)}

    def summary(self, particles: ParticleSet, model: MeltPoolModel) -> Summary:
        radius = self.radius
        if radius is None:
            radius = equivalent_radius(particles)
        lengths = np.asarray(self.series.get("length", []))
        period = oscillation_period(self.series["t"], lengths - 2.0 * radius)
        analytic = rayleigh_period(
            radius,
            self.material.rho0,
            self.material.alpha0,
            particles.dimension,
        )
        values = {
            "radius": radius,
            "period": period,
            "reference_period": OSCILLATION_REFERENCE_PERIOD,
            "analytic_period": analytic,
        }
        return values, self.series


class MeltPoolObserver(SeriesObserver):
    """Melt pool depth and width plus the interface-band velocity variance.

    The pool holds every initially solid particle that has melted, including
    those that solidified again. Depth is measured along the last axis from
    the initial substrate top.
    """

    def __init__(self, config: ScenarioConfig, every: int = 1) -> None:
        super().__init__(every)
        self.dx = config.numerics.dx
        self.surface: Optional[float] = None

    def sample(
        self, time: float, particles: ParticleSet, model: MeltPoolModel
    ) -> Dict[str, float]:
        axis = particles.dimension - 1
        if self.surface is None:
            substrate = particles.initial_phase == Phase.SOLID
            self.surface = (
                float(particles.position[substrate, axis].max()) + 0.5 * self.dx
                if np.any(substrate)
                else 0.0
            )
        pool = (particles.initial_phase == Phase.SOLID) & particles.melted
        depth = width = 0.0
        if np.any(pool):
            points = particles.position[pool]
            depth = self.surface - float(points[:, axis].min()) + 0.5 * self.dx
            width = float(points[:, 0].max() - points[:, 0].min()) + self.dx
        return {
            "depth": depth,
            "width": width,
            "liquid": float(np.count_nonzero(particles.phase == Phase.LIQUID)),
            "band_velocity_variance": band_velocity_variance(particles, model),
            "max_temperature": float(particles.temperature.max()),
        }

    def summary(self, particles: ParticleSet, model: MeltPoolModel) -> Summary:
        values: Dict[str, float] = {}
        for name, key in (
            ("depth", "max_depth"),
            ("width", "max_width"),
            ("max_temperature", "max_temperature"),
        ):
            series = self.series.get(name, [])
            values[key] = max(series) if series else 0.0
        variance = self.series.get("band_velocity_variance", [])
        values["mean_band_velocity_variance"] = (
            float(np.mean(variance)) if variance else 0.0
        )
        return values, self.series


ObserverFactory = Callable[[ScenarioConfig, int], SeriesObserver]


@dataclass(frozen=True)
class Benchmark:
    name: str
    scenario: str
    observers: Tuple[ObserverFactory, ...]
    samples: int = 400


BENCHMARKS: Dict[str, Benchmark] = {
    bench.name: bench
    for bench in (
        Benchmark("static_droplet", "static_droplet", (PressureJumpObserver,), 100),
        Benchmark("migration", "migration", (MigrationObserver,)),
        Benchmark("oscillation", "oscillation", (OscillationObserver,), 2000),
        Benchmark("melt2d", "melt2d", (MeltPoolObserver,)),
        Benchmark("keyhole2d", "keyhole2d", (MeltPoolObserver,)),
        Benchmark("keyhole2d_noevap", "keyhole2d_noevap", (MeltPoolObserver,)),
        Benchmark("heated_drop", "heated_drop", (MeltPoolObserver,)),
        Benchmark("point3d", "point3d", (MeltPoolObserver,)),
        Benchmark("line3d", "line3d", (MeltPoolObserver,)),
    )
}


def benchmark_names() -> List[str]:
    return list(BENCHMARKS)


def run_benchmark(
    name: str,
    resolution_scale: float = 1.0,
    output_dir: Optional[Union[str, Path]] = None,
    max_steps: Optional[int] = None,
    overrides: Iterable[str] = (),
) -> BenchmarkReport:
    """Run one benchmark and reduce its observations to a report.

    Divergence yields a partial report with status ``diverged`` and the
    failing step.

    Raises:
        KeyError: Unknown benchmark name.
    """
    if name not in BENCHMARKS:
        raise KeyError(f"Unknown benchmark {name!r}; known: {', '.join(BENCHMARKS)}")
    bench = BENCHMARKS[name]
    config = load_scenario(scenario_path(bench.scenario), list(overrides))
    config = scale_resolution(config, resolution_scale)
    steps = math.ceil(config.scenario.end_time / config.numerics.dt)
    if max_steps is not None:
        steps = min(steps, max_steps)
    every = max(1, steps // bench.samples)
    observers = [factory(config, every) for factory in bench.observers]
    simulation = Simulation(config, output_dir, observers)
    result = simulation.run(max_steps)

    observables: Dict[str, float] = {}
    series: Dict[str, List[float]] = {}
    for observer in observers:
        values, samples = observer.summary(simulation.particles, simulation.model)
        observables.update(values)
        series.update(samples)
    report = BenchmarkReport(
        name=name,
        scenario=bench.scenario,
        status="ok" if result.ok else "diverged",
        steps=result.steps,
        time=result.time,
        resolution_scale=resolution_scale,
        observables=observables,
        series=series,
        failure_step=None if result.ok else result.steps,
        message=None if result.diverged is None else str(result.diverged),
    )
    if output_dir is not None:
        report.write(Path(output_dir) / REPORT_NAME)
    if report.ok:
        logger.info("Benchmark %s: %s", name, _format_observables(observables))
    else:
        logger.error("Benchmark %s diverged at step %s", name, report.failure_step)
    return report


def _format_observables(values: Dict[str, float]) -> str:
    return ", ".join(f"{k}={v:.6g}" for k, v in values.items())


async def run_benchmarks_async(
    names: Sequence[str],
    resolution_scale: float = 1.0,
    output_dir: Optional[Union[str, Path]] = None,
    max_steps: Optional[int] = None,
    overrides: Iterable[str] = (),
    limit: Optional[int] = None,
) -> List[BenchmarkReport]:
    """Run several benchmarks concurrently, one output folder each."""
    unknown = [n for n in names if n not in BENCHMARKS]
    if unknown:
        raise KeyError(f"Unknown benchmarks: {', '.join(unknown)}")
    patches = list(overrides)

    def job(name: str) -> Callable[[], BenchmarkReport]:
        folder = None if output_dir is None else Path(output_dir) / name
        return lambda: run_benchmark(name, resolution_scale, folder, max_steps, patches)

    return await run_batch([job(n) for n in names], limit)


def run_benchmarks(names: Sequence[str], **kwargs: Any) -> List[BenchmarkReport]:
    async def main() -> List[BenchmarkReport]:
        return await run_benchmarks_async(names, **kwargs)

    return anyio.run(main)
