import numpy as np
import pytest

from sphmelt.fluid import (
    density_summation,
    eos_density,
    eos_pressure,
    interface_viscous_force,
    mechanical_velocity,
    pressure_viscous_forces,
    transport_velocity_terms,
    viscosity_ramp,
    zeta_field,
)
from sphmelt.kernel import KernelSpec
from sphmelt.model import Phase
from sphmelt.particles import ParticleSet
from tests.conftest import index_of, lattice, pairs_for


def test_density_summation_on_lattice(steel):
    dx = 0.5
    spec = KernelSpec(h=dx, dimension=2)
    points = lattice((14, 14), dx)
    particles = ParticleSet.from_arrays(points, materials=[steel], smoothing_length=dx)
    rho = density_summation(particles, pairs_for(points, spec), spec)
    center = index_of(points, (0.0, 0.0))
    assert rho[center] == pytest.approx(7430.0, rel=1e-2)
    assert rho.min() < 0.65 * 7430.0


class TestEquationOfState:
    def test_pressure(self):
        assert eos_pressure(1.01 * 7430.0, 7430.0, 1.0e7) == pytest.approx(1.0e5)

    def test_inverse(self):
        rho = np.array([7000.0, 7430.0, 7600.0])
        p = eos_pressure(rho, 7430.0, 2.0e6)
        assert eos_density(p, 7430.0, 2.0e6) == pytest.approx(rho)


def test_forces_conserve_momentum(spec):
    rng = np.random.default_rng(2)
    points = lattice((10, 10)) + rng.uniform(-0.2, 0.2, (100, 2))
    particles = ParticleSet.from_arrays(
        points,
        velocity=rng.normal(size=(100, 2)),
        density=7430.0 * rng.uniform(0.98, 1.02, 100),
    )
    particles.pressure[:] = rng.normal(scale=1.0e4, size=100)
    force = pressure_viscous_forces(particles, pairs_for(points, spec), spec)
    scale = np.abs(force).sum()
    assert scale > 0
    assert np.abs(force.sum(axis=0)).max() < 1e-10 * scale


def test_uniform_pressure_interior_force_vanishes(spec):
    points = lattice((12, 12))
    particles = ParticleSet.from_arrays(points)
    particles.pressure[:] = 5.0e3
    force = pressure_viscous_forces(
        particles, pairs_for(points, spec), spec, viscous=False
    )
    center = index_of(points, (0.5, 0.5))
    assert np.abs(force[center]).max() < 1e-8 * 5.0e3


def test_rigid_rows_are_zero(spec):
    points = lattice((6, 6))
    phase = np.where(points[:, 1] < 0, int(Phase.WALL), int(Phase.LIQUID))
    particles = ParticleSet.from_arrays(points, phase=phase)
    particles.pressure[:] = 1.0e3
    force = pressure_viscous_forces(particles, pairs_for(points, spec), spec)
    assert np.all(force[phase == Phase.WALL] == 0.0)


def test_mechanical_velocity_uses_ghost_velocity():
    particles = ParticleSet.from_arrays(
        np.zeros((2, 2)),
        velocity=[[1.0, 0.0], [1.0, 0.0]],
        phase=[Phase.LIQUID, Phase.WALL],
    )
    particles.ghost_velocity[1] = [0.0, 3.0]
    assert mechanical_velocity(particles).tolist() == [[1.0, 0.0], [0.0, 3.0]]


class TestTransportVelocity:
    def test_no_correction_without_drift(self, spec):
        points = lattice((6, 6))
        rng = np.random.default_rng(0)
        particles = ParticleSet.from_arrays(
            points, velocity=rng.normal(size=(36, 2))
        )
        a_b, f_a = transport_velocity_terms(particles, pairs_for(points, spec), spec)
        assert np.all(a_b == 0.0)
        assert np.allclose(f_a, 0.0)

    def test_background_pressure_pushes_edge_outward(self, spec):
        points = lattice((10, 10))
        particles = ParticleSet.from_arrays(points, background_pressure=1.0e3)
        a_b, _ = transport_velocity_terms(particles, pairs_for(points, spec), spec)
        corner = int(np.argmin(points.sum(axis=1)))
        assert a_b[corner, 0] < 0
        assert a_b[corner, 1] < 0


class TestInterfaceViscosity:
    def test_opposes_approach(self):
        spec = KernelSpec(h=1.0, dimension=2)
        points = np.array([[0.0, 0.0], [1.0, 0.0]])
        particles = ParticleSet.from_arrays(
            points, velocity=[[1.0, 0.0], [0.0, 0.0]], reference_pressure=1.0e4
        )
        zeta = np.array([1.0, 0.0])
        force = interface_viscous_force(particles, pairs_for(points, spec), spec, zeta)
        assert force[0, 0] < 0
        assert force[0, 1] == pytest.approx(0.0)
        assert np.all(force[1] == 0.0)

    def test_shear_decay_matches_equivalent_viscosity(self):
        h, zeta, c = 3.0, 1.0, 10.0
        spec = KernelSpec(h=h, dimension=2)
        width, height = 24, 48
        xs = np.arange(width) + 0.5
        ys = np.arange(height) + 0.5
        points = np.array([[x, y] for x in xs for y in ys])
        n = len(points)
        u = np.zeros((n, 2))
        u[:, 0] = 1.0e-3 * np.sin(2.0 * np.pi * points[:, 1] / height)
        particles = ParticleSet.from_arrays(
            points,
            velocity=u,
            mass=np.full(n, 7430.0),
            smoothing_length=h,
            reference_pressure=7430.0 * c**2,
        )
        pairs = pairs_for(
            points, spec, (True, True), (0.0, 0.0), (float(width), float(height))
        )

        def decay_rate(force):
            return -np.einsum("ij,ij->", force, u) / (particles.mass @ (u**2).sum(1))

        artificial = interface_viscous_force(particles, pairs, spec, np.full(n, zeta))
        nu = 0.5 * zeta * h * c / (spec.dimension + 2)
        physical = pressure_viscous_forces(
            particles, pairs, spec, np.full(n, 7430.0 * nu), pressure=False
        )
        assert decay_rate(physical) > 0
        assert decay_rate(artificial) == pytest.approx(decay_rate(physical), rel=0.1)

    def test_inactive_without_zeta(self, spec):
        points = lattice((3, 3))
        particles = ParticleSet.from_arrays(points, velocity=np.ones((9, 2)))
        force = interface_viscous_force(
            particles, pairs_for(points, spec), spec, np.zeros(9)
        )
        assert np.all(force == 0.0)


class TestSolidLiquidRamp:
    def test_ramp_values(self):
        T = np.array([1500.0, 1700.0, 2600.0, 3500.0, 4000.0])
        ramp = viscosity_ramp(T, np.full(5, 1700.0), 3500.0)
        assert ramp.tolist() == pytest.approx([1.0, 1.0, 0.5, 0.0, 0.0])

    def test_zeta_only_on_liquid(self):
        particles = ParticleSet.from_arrays(
            np.zeros((3, 2)),
            phase=[Phase.LIQUID, Phase.SOLID, Phase.LIQUID],
            temperature=[1700.0, 1600.0, 3500.0],
        )
        zeta = zeta_field(
            particles, np.zeros(3), 0.0, 10.0, 3500.0, np.zeros(3, dtype=bool)
        )
        assert zeta.tolist() == pytest.approx([10.0, 0.0, 0.0])

    def test_liquid_gas_term_on_interface_sides(self):
        particles = ParticleSet.from_arrays(np.zeros((2, 2)))
        zeta = zeta_field(
            particles,
            np.array([0.5, 0.5]),
            2.0,
            0.0,
            None,
            np.array([True, False]),
        )
        assert zeta.tolist() == pytest.approx([1.0, 0.0])
