"""
Kick-drift-kick time stepping, time-step limits and boundary conditions.

``kick_drift_kick`` works on any ``ForceModel``; the full melt-pool physics
lives in ``sphmelt.solver``. One step runs::

    u_half = u + dt/2 a
    u_tr   = u_half + dt/2 a_b       (transport velocity)
    r     += dt u_tr
    refresh (periodic wrap, neighbors, density, pressure, walls, interfaces)
    T     += dt dT/dt
    phase update
    a      = accelerations
    u      = u_half + dt/2 a
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Optional,
    Protocol,
    Sequence,
    runtime_checkable,
)

import numpy as np

from sphmelt.fluid import eos_density
from sphmelt.kernel import KernelSpec, kernel_value
from sphmelt.model import DomainSpec, Phase
from sphmelt.neighbors import FloatArray, PairList, wrap_periodic
from sphmelt.particles import ParticleSet

logger = logging.getLogger(__name__)


@dataclass
class StepReport:
    step: int
    time: float
    max_speed: float
    density_ratio_min: float
    density_ratio_max: float
    temperature_min: float
    temperature_max: float
    dt_headroom: float = math.inf
    counters: Dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


class SimulationDiverged(RuntimeError):
    """Non-finite state detected; ``report`` describes the failing step."""

    def __init__(self, report: StepReport, fields: Sequence[str]) -> None:
        self.report = report
        self.fields = list(fields)
        super().__init__(
            f"Non-finite values in {', '.join(self.fields)} at step {report.step} "
            f"(t={report.time:g})"
        )


@runtime_checkable
class ForceModel(Protocol):
    def refresh(self, particles: ParticleSet, time: float) -> None: ...

    def temperature_rate(self, particles: ParticleSet, time: float) -> FloatArray: ...

    def update_phases(self, particles: ParticleSet) -> int: ...

    def accelerations(self, particles: ParticleSet, time: float) -> None: ...

    def diagnostics(self, particles: ParticleSet) -> Dict[str, int]: ...


def _mobile(particles: ParticleSet) -> Any:
    return particles.fluid


def kick_drift_kick(
    particles: ParticleSet, model: ForceModel, dt: float, time: float
) -> None:
    """Advance ``particles`` in place from ``time`` to ``time + dt``."""
    moving = _mobile(particles)
    half = particles.velocity + 0.5 * dt * particles.acceleration
    transport = half + 0.5 * dt * particles.background_acceleration
    particles.velocity[moving] = half[moving]
    particles.transport_velocity[moving] = transport[moving]
    particles.position[moving] += dt * transport[moving]

    t_new = time + dt
    model.refresh(particles, t_new)
    rate = model.temperature_rate(particles, t_new)
    particles.temperature_rate[:] = rate
    not_wall = particles.phase != Phase.WALL
    particles.temperature[not_wall] += dt * rate[not_wall]
    model.update_phases(particles)
    model.accelerations(particles, t_new)

    moving = _mobile(particles)
    particles.velocity[moving] += 0.5 * dt * particles.acceleration[moving]
    particles.velocity[~moving] = 0.0
    particles.transport_velocity[~moving] = 0.0


def make_report(
    particles: ParticleSet,
    step_index: int,
    time: float,
    counters: Optional[Dict[str, int]] = None,
) -> StepReport:
    assert particles.props is not None
    fluid = particles.fluid
    with np.errstate(invalid="ignore"):
        speed = np.linalg.norm(particles.velocity, axis=1)
        ratio = particles.density / particles.props.rho0

    def extreme(values: FloatArray, fn: Any) -> float:
        return float(fn(values)) if values.size else math.nan

    return StepReport(
        step=step_index,
        time=time,
        max_speed=extreme(speed[fluid], np.max),
        density_ratio_min=extreme(ratio[fluid], np.min),
        density_ratio_max=extreme(ratio[fluid], np.max),
        temperature_min=extreme(particles.temperature, np.min),
        temperature_max=extreme(particles.temperature, np.max),
        counters=dict(counters or {}),
    )


def non_finite_fields(particles: ParticleSet) -> List[str]:
    names = ("position", "velocity", "density", "pressure", "temperature")
    return [name for name in names if not np.all(np.isfinite(getattr(particles, name)))]


def step(
    particles: ParticleSet,
    model: ForceModel,
    dt: float,
    time: float = 0.0,
    step_index: int = 0,
) -> StepReport:
    """One checked kick-drift-kick step.

    Raises:
        SimulationDiverged: Any state array holds NaN or Inf afterwards.
    """
    kick_drift_kick(particles, model, dt, time)
    report = make_report(
        particles, step_index + 1, time + dt, counters=model.diagnostics(particles)
    )
    bad = non_finite_fields(particles)
    if bad:
        logger.error("Simulation diverged at step %d: %s", report.step, ", ".join(bad))
        raise SimulationDiverged(report, bad)
    logger.debug("%s", report)
    return report


class Integrator:
    """Fixed-step driver holding the time and step counter.

    ``limit`` returns the stable time step of the current state; when given,
    every report carries the headroom and crossing the limit is logged.
    """

    def __init__(
        self,
        particles: ParticleSet,
        model: ForceModel,
        dt: float,
        time: float = 0.0,
        limit: Optional[Callable[[ParticleSet], float]] = None,
    ) -> None:
        self.particles = particles
        self.model = model
        self.dt = dt
        self.time = time
        self.limit = limit
        self.step_index = 0
        self._primed = False
        self._over_limit = False

    def prime(self) -> None:
        """Evaluate fields and accelerations of the initial state."""
        self.model.refresh(self.particles, self.time)
        self.model.accelerations(self.particles, self.time)
        self._primed = True

    def step(self) -> StepReport:
        if not self._primed:
            self.prime()
        report = step(self.particles, self.model, self.dt, self.time, self.step_index)
        if self.limit is not None:
            report.dt_headroom = self.limit(self.particles) / self.dt
            over = report.dt_headroom < 1.0
            if over and not self._over_limit:
                logger.warning(
                    "Time step %g exceeds the stable limit %g at step %d",
                    self.dt,
                    report.dt_headroom * self.dt,
                    report.step,
                )
            self._over_limit = over
        self.time = report.time
        self.step_index = report.step
        return report

    def run(self, steps: int) -> StepReport:
        report = make_report(self.particles, self.step_index, self.time)
        for _ in range(steps):
            report = self.step()
        return report


@dataclass(frozen=True)
class Medium:
    """Per-phase parameters entering the time-step limit.

    A zero parameter disables its term; immobile media (solid) only carry
    the conduction limit.
    """

    h: float
    sound_speed: float
    density: float
    mobile: bool = True
    viscosity: float = 0.0
    surface_tension: float = 0.0
    heat_capacity: float = 0.0
    conductivity: float = 0.0


def time_step_terms(
    medium: Medium, max_speed: float = 0.0, max_body_acceleration: float = 0.0
) -> Dict[str, float]:
    h, rho = medium.h, medium.density
    nu = medium.viscosity / rho
    conduction = (
        0.125 * rho * medium.heat_capacity * h * h / medium.conductivity
        if medium.conductivity > 0
        else math.inf
    )
    if not medium.mobile:
        return {"conduction": conduction}
    return {
        "cfl": 0.25 * h / (medium.sound_speed + max_speed),
        "viscous": 0.125 * h * h / nu if nu > 0 else math.inf,
        "body_force": (
            0.25 * math.sqrt(h / max_body_acceleration)
            if max_body_acceleration > 0
            else math.inf
        ),
        "surface_tension": (
            0.25 * math.sqrt(rho * h**3 / (2.0 * math.pi * medium.surface_tension))
            if medium.surface_tension > 0
            else math.inf
        ),
        "conduction": conduction,
    }


def stable_dt(
    media: Sequence[Medium], max_speed: float = 0.0, max_body_acceleration: float = 0.0
) -> float:
    """Smallest admissible time step over all media and limit terms."""
    return min(
        min(time_step_terms(m, max_speed, max_body_acceleration).values())
        for m in media
    )


def apply_wall_bc(
    particles: ParticleSet,
    pairs: PairList,
    spec: KernelSpec,
    gravity: FloatArray,
    wall_mode: str = "noslip",
    wall_acceleration: Optional[FloatArray] = None,
) -> None:
    """Extrapolate pressure, density and ghost velocity onto rigid particles.

    p_w = (sum_f p_f W_wf + (g - a_w) . sum_f rho_f r_wf W_wf) / sum_f W_wf

    Density follows from the equation of state. The ghost velocity is
    2 u_wall - u_avg (no-slip) or keeps the averaged tangential fluid
    velocity (free-slip). Solid particles always use no-slip with zero
    wall velocity. Rigid particles without fluid neighbors keep rho0,
    p = 0 and the wall velocity.
    """
    assert particles.props is not None
    rigid = particles.rigid
    fluid = particles.fluid
    sub = pairs.select(rigid[pairs.i] & fluid[pairs.j])
    j = sub.j
    w = kernel_value(sub.r, spec)
    weight = sub.accumulate(w)
    p_sum = sub.accumulate(particles.pressure[j] * w)
    rho_r = sub.accumulate((particles.density[j] * w)[:, None] * sub.rij)
    u_sum = sub.accumulate(w[:, None] * particles.velocity[j])

    body = np.broadcast_to(np.asarray(gravity, dtype=np.float64), rho_r.shape)
    if wall_acceleration is not None:
        body = body - wall_acceleration
    has = rigid & (weight > 0)
    rho0 = particles.props.rho0
    p0 = particles.reference_pressure
    u_wall = particles.wall_velocity

    p_w = np.zeros(len(particles))
    p_w[has] = (p_sum[has] + np.einsum("ij,ij->i", body[has], rho_r[has])) / weight[has]
    particles.pressure[rigid] = p_w[rigid]
    rho_w = eos_density(p_w, rho0, p0)
    particles.density[has] = np.maximum(rho_w[has], 1.0e-3 * rho0[has])
    lonely = rigid & ~has
    particles.density[lonely] = rho0[lonely]

    u_avg = np.zeros_like(particles.velocity)
    u_avg[has] = u_sum[has] / weight[has, None]
    ghost = 2.0 * u_wall - u_avg
    if wall_mode == "freeslip":
        walls = has & (particles.phase == Phase.WALL)
        n = particles.wall_normal[walls]
        tangential = u_avg[walls] - np.einsum("ij,ij->i", u_avg[walls], n)[:, None] * n
        ghost[walls] = (
            tangential + np.einsum("ij,ij->i", ghost[walls], n)[:, None] * n
        )
    elif wall_mode != "noslip":
        raise ValueError(f"Unknown wall mode {wall_mode!r}")
    particles.ghost_velocity[has] = ghost[has]
    particles.ghost_velocity[lonely] = u_wall[lonely]


def apply_periodic_bc(particles: ParticleSet, domain: DomainSpec) -> int:
    """Wrap positions into the primary cell along periodic axes."""
    return wrap_periodic(
        particles.position,
        np.asarray(domain.lower, dtype=np.float64),
        np.asarray(domain.upper, dtype=np.float64),
        domain.periodic,
    )
