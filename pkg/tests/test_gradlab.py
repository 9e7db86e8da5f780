from pathlib import Path

import numpy as np
import orjson
import pydantic
import pytest

from sphmelt.gradlab import (
    GROUPS,
    CloudParams,
    FieldParams,
    GradlabConfig,
    gradient_study,
    interface_frame,
    kinked_field,
    lattice_cloud,
    load_gradlab,
)
from sphmelt.particles import ParticleSet
from sphmelt.snapshot import write_snapshot
from sphmelt.validation import ValidationError

EXAMPLE_CONFIG = Path(__file__).parents[1] / "example" / "gradlab.cfg"


def study_config(**cloud):
    params = {"dimension": 2, "dx": 1.0, "extent": [20.0, 20.0], **cloud}
    return GradlabConfig(
        cloud=CloudParams(**params),
        field=FieldParams(
            offset=1700.0, normal_gradient_below=2.0, conductivity_ratio=0.5
        ),
    )


class TestConfig:
    def test_cloud_needs_a_source(self):
        with pytest.raises(pydantic.ValidationError):
            CloudParams(dimension=2)

    def test_extent_matches_dimension(self):
        with pytest.raises(pydantic.ValidationError, match="extent has 3 entries"):
            CloudParams(dimension=2, extent=[1.0, 1.0, 1.0])

    def test_flux_continuity(self):
        params = FieldParams(normal_gradient_below=2.0, conductivity_ratio=0.5)
        assert params.gradient_above == 1.0
        explicit = FieldParams(normal_gradient_above=3.0, conductivity_ratio=0.5)
        assert explicit.gradient_above == 3.0

    def test_load_example(self):
        config = load_gradlab(EXAMPLE_CONFIG)
        assert config.cloud.extent == (30.0, 30.0)
        assert config.field.gradient_above == 1.0

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "study.cfg"
        path.write_text("[solver]\nsteps = 3\n")
        with pytest.raises(ValidationError) as exc:
            load_gradlab(path)
        assert exc.value.messages == ['Field "solver" error: unknown section']


class TestField:
    def test_default_frame(self):
        point, normal, tangent = interface_frame(FieldParams(), 2)
        assert point.tolist() == [0.0, 0.0]
        assert normal.tolist() == [0.0, 1.0]
        assert tangent.tolist() == [1.0, 0.0]

    def test_zero_normal_rejected(self):
        with pytest.raises(ValidationError):
            interface_frame(FieldParams(interface_normal=[0.0, 0.0]), 2)

    def test_kink(self):
        params = FieldParams(
            offset=0.0, normal_gradient_below=2.0, conductivity_ratio=0.5
        )
        points = np.array([[0.0, -1.0], [0.0, 1.0], [2.0, 0.0]])
        assert kinked_field(points, params).tolist() == [-2.0, 1.0, 2.0]

    def test_lattice_cloud(self):
        points = lattice_cloud(CloudParams(dimension=2, dx=0.5, extent=[2.0, 1.0]))
        assert points.shape == (8, 2)
        assert points.min(axis=0).tolist() == [-0.75, -0.25]


class TestGradientStudy:
    def test_lattice_errors(self):
        report = gradient_study(study_config())
        assert report.particles == 400
        assert sum(report.groups.values()) == 400
        assert set(report.groups) == set(GROUPS)
        for group in GROUPS:
            assert report.error("csph", group, "full") == 0.0
            assert report.error("cspm", group, "full") < 1e-8
        assert report.error("standard", "truncated", "full") > 1.0
        assert report.error("asymmetric", "interior", "full") < 1e-2
        assert report.cspm_csph_max_relative < 1e-8

    def test_tangential_jump_insensitivity(self):
        report = gradient_study(study_config())
        assert report.error("asymmetric", "band") < 0.02
        assert report.error("standard", "truncated") > 0.1
        assert report.error("symmetric", "truncated") > 0.1

    def test_example_study_tangential_errors(self):
        report = gradient_study(load_gradlab(EXAMPLE_CONFIG))
        assert report.error("asymmetric", "band") < 0.02
        assert report.error("asymmetric", "interior") < 0.02
        assert report.error("standard", "truncated") > 0.1

    def test_missing_row(self):
        report = gradient_study(study_config(extent=[12.0, 12.0]))
        with pytest.raises(KeyError):
            report.error("spectral", "band")

    def test_report_written(self, tmp_path):
        config = study_config(extent=[12.0, 12.0], jitter=0.1, seed=3)
        target = tmp_path / "gradients.json"
        config = config.model_copy(
            update={"output": config.output.model_copy(update={"report": str(target)})}
        )
        report = gradient_study(config)
        written = orjson.loads(target.read_bytes())
        assert written["particles"] == report.particles
        assert len(written["rows"]) == len(report.rows)
        assert report.table().splitlines()[0].startswith("variant")

    def test_snapshot_cloud_uses_temperature(self, tmp_path):
        points = lattice_cloud(CloudParams(dimension=2, dx=1.0, extent=[10.0, 10.0]))
        particles = ParticleSet.from_arrays(
            points, temperature=300.0 + 5.0 * points[:, 0]
        )
        path = write_snapshot(particles, 0.0, tmp_path / "cloud.csv")
        config = GradlabConfig(cloud=CloudParams(dx=1.0, snapshot=str(path)))
        report = gradient_study(config)
        assert report.particles == 100
        assert report.error("cspm", "band", "full") < 1e-8
