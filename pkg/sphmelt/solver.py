"""
The assembled melt-pool model.

``MeltPoolModel`` wires fluid, interface and thermal terms into the
``ForceModel`` protocol stepped by ``sphmelt.integrator``. Physics switches
and time ramps from the scenario are applied here.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from sphmelt.fluid import (
    density_summation,
    eos_pressure,
    interface_viscous_force,
    pressure_viscous_forces,
    transport_velocity_terms,
    zeta_field,
)
from sphmelt.integrator import Medium, apply_periodic_bc, apply_wall_bc, stable_dt
from sphmelt.interface import (
    InterfaceFieldSet,
    Pairing,
    color_field_gradient,
    curvature,
    interface_sides,
    marangoni_force,
    recoil_force,
    recoil_pressure,
    surface_tension_normal_force,
    wetting_force,
    wetting_normal_correction,
)
from sphmelt.kernel import GradientCounters, GradientVariant, KernelSpec, gradient_field
from sphmelt.model import (
    Phase,
    ScenarioConfig,
    surface_tension_coefficient,
    surface_tension_slope,
)
from sphmelt.neighbors import (
    BoolArray,
    FloatArray,
    NeighborIndex,
    PairList,
    build_index,
)
from sphmelt.particles import ParticleSet, phase_update
from sphmelt.thermal import (
    conduction_divergence,
    energy_rate,
    evaporation_loss,
    laser_source,
)

logger = logging.getLogger(__name__)


class MeltPoolModel:
    """Weakly compressible multiphase SPH with thermo-capillarity and phase change."""

    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.physics = config.physics
        numerics = config.numerics
        self.spec = KernelSpec(
            h=numerics.h, kappa=numerics.kappa, dimension=config.dimension
        )
        domain = config.domain
        pad = np.array(
            [
                0.0 if periodic else (domain.wall_layers + 1) * numerics.dx
                for periodic in domain.periodic
            ]
        )
        self.lower = np.asarray(domain.lower, dtype=np.float64) - pad
        self.upper = np.asarray(domain.upper, dtype=np.float64) + pad
        self.gravity = domain.gravity_vector()
        self.counters = GradientCounters()
        self.interface_counters: Dict[str, int] = {}
        self.index: Optional[NeighborIndex] = None
        self.fields: Optional[InterfaceFieldSet] = None

    @property
    def pairs(self) -> PairList:
        if self.index is None:
            raise RuntimeError("refresh() must run before pair data is used")
        return self.index.pairs()

    def interface_fields(self) -> InterfaceFieldSet:
        if self.fields is None:
            raise RuntimeError("refresh() must run before interface fields are used")
        return self.fields

    def sides(self, particles: ParticleSet) -> BoolArray:
        return interface_sides(particles, self.config.numerics.interface_sides)

    # ForceModel

    def refresh(self, particles: ParticleSet, time: float) -> None:
        """Wrap, re-index and re-evaluate density, pressure, walls and interfaces."""
        self.counters.reset()
        self.interface_counters = {}
        apply_periodic_bc(particles, self.config.domain)
        self.index = build_index(
            particles.position,
            self.spec.radius,
            self.lower,
            self.upper,
            self.config.domain.periodic,
        )
        self._evaluate_state(particles)

    def temperature_rate(self, particles: ParticleSet, time: float) -> FloatArray:
        fields = self.interface_fields()
        physics = self.physics
        conduction = (
            conduction_divergence(particles, self.pairs, self.spec)
            if physics.conduction
            else None
        )
        laser = None
        if physics.laser and self.config.laser is not None:
            laser = laser_source(
                particles,
                fields.lg_raw or fields.lg,
                fields.sg,
                self.config.laser,
                time,
                scale=self.config.ramp_factor("laser", time),
            )
        evaporation = (
            evaporation_loss(particles, fields.lg) if physics.evaporation else None
        )
        return energy_rate(particles, conduction, laser, evaporation)

    def update_phases(self, particles: ParticleSet) -> int:
        if not self.physics.phase_change:
            return 0
        changed = phase_update(particles, self.config)
        if changed:
            self._evaluate_state(particles)
        return changed

    def accelerations(self, particles: ParticleSet, time: float) -> None:
        assert particles.props is not None
        props = particles.props
        physics = self.physics
        pairs = self.pairs
        fields = self.interface_fields()
        ramp = self.config.ramp_factor
        sides = self.sides(particles)
        T = particles.temperature

        viscosity = props.viscosity.copy()
        viscosity[particles.mask(Phase.LIQUID)] *= ramp("viscosity", time)
        force = pressure_viscous_forces(
            particles,
            pairs,
            self.spec,
            viscosity=viscosity,
            pressure=physics.pressure,
            viscous=physics.viscosity,
        )

        particles.background_acceleration[:] = 0.0
        if physics.transport_velocity:
            a_b, f_a = transport_velocity_terms(particles, pairs, self.spec)
            particles.background_acceleration[:] = a_b
            force += f_a

        alpha = surface_tension_coefficient(T, props) * ramp("surface_tension", time)
        if physics.surface_tension:
            force += surface_tension_normal_force(
                particles, fields.lg, fields.curvature, alpha, sides
            )
        if physics.marangoni:
            grad_T = gradient_field(
                T, particles.volume, pairs, self.spec, GradientVariant.ASYMMETRIC
            )
            slope = (
                surface_tension_slope(T, props)
                * ramp("surface_tension", time)
                * ramp("marangoni", time)
            )
            force += marangoni_force(particles, fields.lg, grad_T, slope, sides)
        if physics.wetting and self._has_wetting(particles):
            force += wetting_force(
                particles,
                fields.lg_raw or fields.lg,
                fields.sf,
                np.radians(props.contact_angle),
                alpha * ramp("wetting", time),
                sides,
                counters=self.interface_counters,
            )
        if physics.recoil:
            p_v = recoil_pressure(T, props) * ramp("recoil", time)
            force += recoil_force(particles, fields.lg, p_v, sides)
        if physics.interface_viscosity:
            numerics = self.config.numerics
            zeta = zeta_field(
                particles,
                fields.lg.delta,
                numerics.zeta_lg_scaled,
                numerics.zeta_sl,
                numerics.t_max,
                sides,
            )
            if np.any(zeta > 0):
                force += interface_viscous_force(
                    particles, pairs, self.spec, zeta, eps=numerics.eps_visc
                )

        fluid = particles.fluid
        acceleration = force / particles.mass[:, None] + self.gravity
        acceleration[~fluid] = 0.0
        particles.acceleration[:] = acceleration

    def diagnostics(self, particles: ParticleSet) -> Dict[str, int]:
        counts = {
            "skipped_pairs": self.pairs.skipped if self.index is not None else 0,
            "corrected_fallbacks": self.counters.corrected_fallbacks,
        }
        counts.update(self.interface_counters)
        return counts

    # Internals

    def _has_wetting(self, particles: ParticleSet) -> bool:
        return bool(
            np.any(particles.rigid)
            and np.any(particles.mask(Phase.LIQUID))
            and np.any(particles.mask(Phase.GAS))
        )

    def _evaluate_state(self, particles: ParticleSet) -> None:
        assert particles.props is not None
        pairs = self.pairs
        fluid = particles.fluid
        if self.physics.density:
            rho = density_summation(particles, pairs, self.spec)
            particles.density[fluid] = rho[fluid]
        particles.pressure[fluid] = eos_pressure(
            particles.density[fluid],
            particles.props.rho0[fluid],
            particles.reference_pressure[fluid],
        )
        apply_wall_bc(
            particles,
            pairs,
            self.spec,
            self.gravity,
            self.config.domain.wall_mode,
        )
        self.fields = self._interface_fields(particles)

    def _interface_fields(self, particles: ParticleSet) -> InterfaceFieldSet:
        """Color fields, wetting-corrected lg normals and curvature, in that order."""
        assert particles.props is not None
        pairs = self.pairs
        lg_raw = color_field_gradient(particles, pairs, self.spec, Pairing.LG)
        sg = color_field_gradient(particles, pairs, self.spec, Pairing.SG)
        sf = color_field_gradient(particles, pairs, self.spec, Pairing.SF)
        lg = lg_raw
        if self.physics.wetting and self._has_wetting(particles):
            lg = wetting_normal_correction(
                particles,
                pairs,
                lg_raw,
                sf,
                np.radians(particles.props.contact_angle),
                self.config.numerics.blend_distance,
                counters=self.interface_counters,
            )
        kappa = curvature(
            particles, pairs, self.spec, lg, self.config.numerics.curvature_tolerance
        )
        return InterfaceFieldSet(lg=lg, sg=sg, sf=sf, curvature=kappa, lg_raw=lg_raw)

    # Time step and output helpers

    def media(self, particles: ParticleSet) -> List[Medium]:
        """One time-step medium per (phase, material) of the non-wall particles."""
        h = self.spec.h
        sides = self.sides(particles)
        media: List[Medium] = []
        for phase in (Phase.LIQUID, Phase.GAS, Phase.SOLID):
            selected = particles.phase == phase
            for material_id in np.unique(particles.material[selected]):
                mat = particles.materials[int(material_id)]
                members = selected & (particles.material == material_id)
                on_side = bool(np.any(sides & members))
                mobile = phase is not Phase.SOLID
                p0 = self.config.phase_numerics(phase).p0 if mobile else 0.0
                media.append(
                    Medium(
                        h=h,
                        sound_speed=float(np.sqrt(p0 / mat.rho0)),
                        density=mat.rho0,
                        mobile=mobile,
                        viscosity=mat.viscosity if self.physics.viscosity else 0.0,
                        surface_tension=(
                            mat.alpha0
                            if self.physics.surface_tension and on_side
                            else 0.0
                        ),
                        heat_capacity=mat.heat_capacity,
                        conductivity=(
                            mat.conductivity if self.physics.conduction else 0.0
                        ),
                    )
                )
        return media

    def stable_dt(self, particles: ParticleSet) -> float:
        fluid = particles.fluid
        speed = (
            float(np.linalg.norm(particles.velocity[fluid], axis=1).max())
            if np.any(fluid)
            else 0.0
        )
        return stable_dt(
            self.media(particles),
            max_speed=speed,
            max_body_acceleration=float(np.linalg.norm(self.gravity)),
        )

    def check_time_step(self, particles: ParticleSet) -> float:
        """Compare the scenario time step with the stable one; warn when above."""
        limit = self.stable_dt(particles)
        dt = self.config.numerics.dt
        if dt > limit:
            logger.warning("Scenario dt %g exceeds the stable time step %g", dt, limit)
        else:
            logger.info("Scenario dt %g, stable time step %g", dt, limit)
        return limit

    def snapshot_fields(self) -> Dict[str, FloatArray]:
        fields = self.interface_fields()
        return {"delta_lg": fields.lg.delta, "curvature": fields.curvature}
