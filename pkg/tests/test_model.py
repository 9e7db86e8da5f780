import math

import numpy as np
import pydantic
import pytest

from sphmelt.model import (
    BallRegion,
    BlockRegion,
    EllipseRegion,
    LaserParams,
    MaterialParams,
    NumericsParams,
    Phase,
    PowderRegion,
    Ramp,
    surface_tension_coefficient,
    surface_tension_slope,
)


class TestPhase:
    def test_labels(self):
        assert Phase.from_label("gas") is Phase.GAS
        assert Phase.WALL.label == "wall"
        assert int(Phase.SOLID) == 0

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            Phase.from_label("plasma")


class TestMaterialParams:
    def test_defaults_are_steel(self):
        steel = MaterialParams()
        assert steel.rho0 == 7430.0
        assert steel.melt_temperature == 1700.0
        assert steel.contact_angle_radians == pytest.approx(math.pi / 3)

    def test_rejects_unknown_key(self):
        with pytest.raises(pydantic.ValidationError):
            MaterialParams(density=1.0)

    def test_contact_angle_range(self):
        with pytest.raises(pydantic.ValidationError):
            MaterialParams(contact_angle=200.0)

    def test_melt_below_boiling(self):
        with pytest.raises(pydantic.ValidationError):
            MaterialParams(melt_temperature=3000.0, boiling_temperature=2000.0)

    def test_frozen(self):
        steel = MaterialParams()
        with pytest.raises(pydantic.ValidationError):
            steel.rho0 = 1.0


class TestSurfaceTension:
    def test_linear_law(self):
        steel = MaterialParams()
        assert surface_tension_coefficient(1700.0, steel) == pytest.approx(1.8)
        assert surface_tension_coefficient(2200.0, steel) == pytest.approx(1.3)
        assert surface_tension_slope(2200.0, steel) == pytest.approx(-1.0e-3)

    def test_clamped_at_tenth(self):
        steel = MaterialParams()
        assert surface_tension_coefficient(5000.0, steel) == pytest.approx(0.18)
        assert surface_tension_slope(5000.0, steel) == 0.0

    def test_array_input(self):
        steel = MaterialParams()
        alpha = surface_tension_coefficient(np.array([1700.0, 1800.0]), steel)
        assert alpha == pytest.approx([1.8, 1.7])


class TestNumerics:
    def test_derived_tolerances(self):
        numerics = NumericsParams(dx=2.0e-6, dt=1.0e-9)
        assert numerics.h == 2.0e-6
        assert numerics.curvature_tolerance == pytest.approx(50.0)
        assert numerics.blend_distance == 2.0e-6

    def test_interface_viscosity_scales_with_h(self):
        numerics = NumericsParams(
            dx=1.0e-6, dt=1.0e-9, zeta_lg=2.5e-7, zeta_lg_reference_h=2.0e-6
        )
        assert numerics.zeta_lg_scaled == pytest.approx(1.25e-7)


class TestLaser:
    def test_direction_must_be_unit(self):
        with pytest.raises(pydantic.ValidationError):
            LaserParams(
                power_density=1.0, radius=1.0, direction=(0.0, -2.0), origin=(0, 0)
            )

    def test_moving_center(self):
        laser = LaserParams(
            power_density=1.0,
            radius=1.0,
            direction=(0.0, -1.0),
            origin=(1.0, 0.0),
            velocity=(2.0, 0.0),
        )
        assert laser.center(0.5) == pytest.approx([2.0, 0.0])

    def test_path_interpolation(self):
        laser = LaserParams(
            power_density=1.0,
            radius=1.0,
            direction=(0.0, -1.0),
            origin=(0.0, 0.0),
            path=[(0.0, (0.0, 0.0)), (1.0, (4.0, 2.0))],
        )
        assert laser.center(0.25) == pytest.approx([1.0, 0.5])
        assert laser.center(3.0) == pytest.approx([4.0, 2.0])

    def test_schedule(self):
        laser = LaserParams(
            power_density=1.0,
            radius=1.0,
            direction=(0.0, -1.0),
            origin=(0.0, 0.0),
            schedule=[(0.0, 1.0), (2.0, 3.0)],
        )
        assert laser.is_on(0.5)
        assert not laser.is_on(1.5)
        assert laser.is_on(2.0)
        assert not laser.is_on(3.0)


class TestRegions:
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [2.0, 2.0]])

    def test_block_half_open(self):
        block = BlockRegion(
            shape="block",
            phase="solid",
            material="steel",
            lower=(0.0, 0.0),
            upper=(1.0, 1.0),
        )
        assert block.contains(self.points).tolist() == [True, False, True, False]

    def test_disc(self):
        disc = BallRegion(
            shape="disc", phase="liquid", material="m", center=(0, 0), radius=1.0
        )
        assert disc.contains(self.points).tolist() == [True, False, True, False]

    def test_ellipse(self):
        ellipse = EllipseRegion(
            shape="ellipse",
            phase="liquid",
            material="m",
            center=(0.0, 0.0),
            semiaxes=(2.0, 0.6),
        )
        assert ellipse.contains(self.points).tolist() == [True, True, True, False]

    def test_powder_explicit_spheres(self):
        powder = PowderRegion(
            shape="powder", material="steel", spheres=[(2.0, 2.0, 0.5)]
        )
        assert powder.phase == "solid"
        assert powder.contains(self.points).tolist() == [False, False, False, True]

    def test_powder_drawn_grains_rest_on_base(self):
        powder = PowderRegion(
            shape="powder",
            material="steel",
            count=5,
            diameter_min=1.0,
            diameter_max=2.0,
            footprint_lower=(-4.0, -4.0),
            footprint_upper=(4.0, 4.0),
            base=1.0,
            seed=3,
        )
        grains = powder.grains(3)
        assert grains.shape == (5, 4)
        assert np.all((grains[:, 3] >= 0.5) & (grains[:, 3] <= 1.0))
        assert grains[:, 2] == pytest.approx(1.0 + grains[:, 3])
        assert np.array_equal(grains, powder.grains(3))

    def test_powder_needs_diameters(self):
        with pytest.raises(pydantic.ValidationError):
            PowderRegion(shape="powder", material="steel", count=3)


class TestRamp:
    def test_factor(self):
        ramp = Ramp(start=1.0, end=3.0)
        assert ramp.factor(0.0) == 0.0
        assert ramp.factor(2.0) == pytest.approx(0.5)
        assert ramp.factor(3.0) == 1.0

    def test_step(self):
        ramp = Ramp(start=3.0e-4, end=3.0e-4, start_value=10.0, end_value=1.0)
        assert ramp.factor(2.9e-4) == 10.0
        assert ramp.factor(3.0e-4) == 1.0

    def test_reversed(self):
        with pytest.raises(pydantic.ValidationError):
            Ramp(start=2.0, end=1.0)
