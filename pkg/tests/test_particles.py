import numpy as np
import pytest

from sphmelt.model import MaterialParams, Phase
from sphmelt.particles import (
    ParticleSet,
    initialize_particles,
    phase_counts,
    phase_update,
)
from sphmelt.scenario import load_scenario, scenario_path
from sphmelt.validation import ValidationError


class TestFromArrays:
    def test_defaults(self, steel):
        particles = ParticleSet.from_arrays(
            np.zeros((3, 2)), materials=[steel], smoothing_length=2.0
        )
        assert len(particles) == 3
        assert particles.dimension == 2
        assert np.all(particles.phase == Phase.LIQUID)
        assert particles.mass == pytest.approx(np.full(3, 7430.0 * 4.0))
        assert particles.volume == pytest.approx(np.full(3, 4.0))
        assert particles.temperature == pytest.approx(np.full(3, 300.0))

    def test_material_view(self, steel, gas):
        particles = ParticleSet.from_arrays(
            np.zeros((2, 1)), material=[1, 0], materials=[steel, gas]
        )
        assert particles.props.rho0.tolist() == [74.3, 7430.0]
        assert particles.density.tolist() == [74.3, 7430.0]

    def test_sound_speed(self, steel):
        particles = ParticleSet.from_arrays(
            np.zeros((1, 2)), materials=[steel], reference_pressure=7430.0 * 4.0
        )
        assert particles.sound_speed == pytest.approx([2.0])

    def test_masks(self):
        phase = [Phase.SOLID, Phase.LIQUID, Phase.GAS, Phase.WALL]
        particles = ParticleSet.from_arrays(np.zeros((4, 2)), phase=phase)
        assert particles.fluid.tolist() == [False, True, True, False]
        assert particles.rigid.tolist() == [True, False, False, True]
        assert phase_counts(particles) == {"solid": 1, "liquid": 1, "gas": 1, "wall": 1}

    def test_copy_is_independent(self):
        particles = ParticleSet.from_arrays(np.zeros((2, 2)))
        clone = particles.copy()
        clone.position[0, 0] = 5.0
        clone.phase[1] = Phase.GAS
        assert particles.position[0, 0] == 0.0
        assert particles.phase[1] == Phase.LIQUID
        assert clone.props is not particles.props


class TestPhaseUpdate:
    def test_melt_and_freeze(self):
        particles = ParticleSet.from_arrays(
            np.zeros((4, 2)),
            velocity=np.ones((4, 2)),
            phase=[Phase.SOLID, Phase.LIQUID, Phase.GAS, Phase.LIQUID],
            temperature=[1800.0, 1600.0, 100.0, 1750.0],
        )
        changed = phase_update(particles)
        assert changed == 2
        assert particles.phase.tolist() == [
            Phase.LIQUID,
            Phase.SOLID,
            Phase.GAS,
            Phase.LIQUID,
        ]
        assert particles.melted.tolist() == [True, False, False, False]
        assert np.all(particles.velocity[1] == 0.0)
        assert np.all(particles.velocity[3] == 1.0)

    def test_exactly_at_melt_temperature_is_unchanged(self):
        particles = ParticleSet.from_arrays(
            np.zeros((2, 2)),
            phase=[Phase.SOLID, Phase.LIQUID],
            temperature=[1700.0, 1700.0],
        )
        assert phase_update(particles) == 0


class TestInitialize:
    def test_tiny_droplet(self, droplet_file):
        config = load_scenario(droplet_file)
        particles = initialize_particles(config)
        counts = phase_counts(particles)
        assert len(particles) == 24 * 30
        assert counts["wall"] == 24 * 6
        assert counts["liquid"] == 112
        assert counts["gas"] == 24 * 24 - 112
        liquid = particles.mask(Phase.LIQUID)
        assert particles.density[liquid] == pytest.approx(np.full(112, 0.25))
        assert particles.mass[liquid] == pytest.approx(np.full(112, 0.25 * 0.01))
        assert np.all(particles.reference_pressure[liquid] == 1.0e4)
        assert np.all(particles.reference_pressure[~liquid] == 2.0e4)

    def test_wall_normals_point_inward(self, droplet_file):
        particles = initialize_particles(load_scenario(droplet_file))
        wall = particles.mask(Phase.WALL)
        below = wall & (particles.position[:, 1] < 0)
        above = wall & (particles.position[:, 1] > 2.4)
        assert np.allclose(particles.wall_normal[below], [0.0, 1.0])
        assert np.allclose(particles.wall_normal[above], [0.0, -1.0])
        assert np.all(particles.wall_normal[~wall] == 0.0)

    def test_static_droplet_counts(self):
        particles = initialize_particles(load_scenario(scenario_path("static_droplet")))
        counts = phase_counts(particles)
        assert counts["liquid"] + counts["gas"] == 4096
        assert counts["liquid"] == 812

    def test_region_temperature(self, droplet_text, tmp_path):
        path = tmp_path / "hot.cfg"
        hot = droplet_text.replace("radius = 0.6", "radius = 0.6\ntemperature = 400")
        path.write_text(hot)
        particles = initialize_particles(load_scenario(path))
        liquid = particles.mask(Phase.LIQUID)
        assert np.all(particles.temperature[liquid] == 400.0)
        assert np.all(particles.temperature[~liquid] == 290.0)

    def test_overlapping_regions(self, droplet_text, tmp_path):
        extra = (
            "\n[region.second]\nshape = disc\nphase = liquid\n"
            "material = fluid1\ncenter = [1.0, 1.0]\nradius = 0.3\n"
        )
        path = tmp_path / "overlap.cfg"
        path.write_text(droplet_text + extra)
        with pytest.raises(ValidationError, match="overlap"):
            initialize_particles(load_scenario(path))


def test_mass_conserved_by_phase_update(steel):
    particles = ParticleSet.from_arrays(
        np.zeros((3, 2)),
        materials=[MaterialParams(), steel],
        material=[0, 1, 1],
        phase=[Phase.SOLID] * 3,
        temperature=[2000.0, 2000.0, 1000.0],
    )
    before = particles.total_mass()
    phase_update(particles)
    assert particles.total_mass() == before


def test_phase_change_takes_new_phase_pressures(droplet_text, tmp_path):
    path = tmp_path / "solid.cfg"
    path.write_text(droplet_text + "\n[phase.solid]\np0 = 5.0e4\npb = 10.0\n")
    config = load_scenario(path)
    particles = ParticleSet.from_arrays(
        np.zeros((3, 2)),
        phase=[Phase.SOLID, Phase.LIQUID, Phase.LIQUID],
        temperature=[1800.0, 1600.0, 1800.0],
        reference_pressure=7.0,
        background_pressure=3.0,
    )
    assert phase_update(particles, config) == 2
    assert particles.reference_pressure.tolist() == [1.0e4, 5.0e4, 7.0]
    assert particles.background_pressure.tolist() == [0.0, 10.0, 3.0]
