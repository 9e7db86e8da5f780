"""
Gradient study on synthetic or snapshot particle clouds.

A temperature field with a kink across a flat interface is sampled on a
lattice (optionally jittered) and differentiated with every gradient
variant. Errors are reported against the CSPH gradient, for the full vector
and for its tangential projection, split into three particle groups:

- ``truncated``: the kernel support is cut by the cloud edge
- ``band``: full support, within one kernel radius of the interface
- ``interior``: full support, away from the interface

Config file example::

    [cloud]
    dimension = 2
    dx = 1.0
    extent = [30.0, 30.0]

    [field]
    offset = 1700.0
    tangential_gradient = 1.0
    normal_gradient_below = 2.0
    conductivity_ratio = 0.5
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import orjson
import pydantic
from pydantic import Field, model_validator

from sphmelt.kernel import (
    GradientCounters,
    GradientVariant,
    KernelSpec,
    gradient_field,
    project_tangential,
)
from sphmelt.model import Record, Vector
from sphmelt.neighbors import FloatArray, PairList, build_index
from sphmelt.scenario import parse_sections, pydantic_messages
from sphmelt.snapshot import read_snapshot_csv, snapshot_positions
from sphmelt.validation import ValidationError, error_msg

logger = logging.getLogger(__name__)

GROUPS = ("truncated", "band", "interior")
QUANTITIES = ("full", "tangential")
REFERENCE = GradientVariant.CSPH


class CloudParams(Record):
    dimension: Literal[1, 2, 3] = 2
    dx: float = Field(1.0, gt=0)
    extent: Optional[Vector] = None
    jitter: float = Field(0.0, ge=0, lt=0.5)
    seed: int = 0
    snapshot: Optional[str] = None

    @model_validator(mode="after")
    def _source(self) -> "CloudParams":
        if self.snapshot is None:
            if self.extent is None:
                raise ValueError("either extent or snapshot is required")
            if len(self.extent) != self.dimension:
                raise ValueError(
                    f"extent has {len(self.extent)} entries, "
                    f"dimension is {self.dimension}"
                )
        return self


class FieldParams(Record):
    """T = offset + g_t (x . t) + g s, s = (x - x_I) . n, g below or above."""

    offset: float = 1700.0
    tangential_gradient: float = 1.0
    normal_gradient_below: float = 1.0
    normal_gradient_above: Optional[float] = None
    conductivity_ratio: float = Field(1.0, gt=0)
    interface_position: Optional[Vector] = None
    interface_normal: Optional[Vector] = None
    tangent: Optional[Vector] = None

    @property
    def gradient_above(self) -> float:
        """Continuous heat flux: k_below g_below = k_above g_above."""
        if self.normal_gradient_above is not None:
            return self.normal_gradient_above
        return self.normal_gradient_below * self.conductivity_ratio


class OutputParams(Record):
    report: Optional[str] = None


class GradlabConfig(Record):
    cloud: CloudParams
    field: FieldParams = Field(default_factory=FieldParams)
    output: OutputParams = Field(default_factory=OutputParams)


def load_gradlab(path: Union[str, Path]) -> GradlabConfig:
    """Parse and validate a gradient-study config file.

    Raises:
        ValidationError: Unknown sections or keys, invalid values.
    """
    source = Path(path)
    sections, lines = parse_sections(source.read_text(encoding="utf-8"), str(source))
    unknown = [name for name in sections if name not in GradlabConfig.model_fields]
    if unknown:
        raise ValidationError([error_msg(name, "unknown section") for name in unknown])
    try:
        config = GradlabConfig.model_validate(sections)
    except pydantic.ValidationError as exc:
        raise ValidationError(pydantic_messages(exc, lines)) from None
    logger.info("Loaded gradient study %s", source)
    return config


@dataclass
class Cloud:
    positions: FloatArray
    volumes: FloatArray
    values: FloatArray
    dx: float

    @property
    def dimension(self) -> int:
        return int(self.positions.shape[1])


def _unit(vector: Optional[Vector], fallback: FloatArray) -> FloatArray:
    v = fallback if vector is None else np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValidationError(error_msg("field", "direction vectors must be non-zero"))
    return v / norm


def interface_frame(
    params: FieldParams, dimension: int
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    """Interface point, unit normal and unit tangent.

    Defaults: the origin, the last axis and the first axis orthogonal to the
    normal.
    """
    axes = np.eye(dimension)
    point = (
        np.zeros(dimension)
        if params.interface_position is None
        else np.asarray(params.interface_position, dtype=np.float64)
    )
    normal = _unit(params.interface_normal, axes[-1])
    if params.tangent is not None:
        guess = np.asarray(params.tangent, dtype=np.float64)
    else:
        guess = axes[0] if abs(normal[0]) < 0.9 else axes[min(1, dimension - 1)]
    tangent = guess - (guess @ normal) * normal
    if dimension == 1 or np.linalg.norm(tangent) == 0.0:
        tangent = np.zeros(dimension)
    else:
        tangent = tangent / np.linalg.norm(tangent)
    return point, normal, tangent


def kinked_field(positions: FloatArray, params: FieldParams) -> FloatArray:
    point, normal, tangent = interface_frame(params, positions.shape[1])
    s = (positions - point) @ normal
    slope = np.where(s < 0.0, params.normal_gradient_below, params.gradient_above)
    along = params.tangential_gradient * (positions @ tangent)
    return params.offset + along + slope * s


def lattice_cloud(params: CloudParams) -> FloatArray:
    """Cell-centred lattice spanning ``extent`` around the origin."""
    assert params.extent is not None
    dx = params.dx
    axes = []
    for length in params.extent:
        count = max(1, int(round(length / dx)))
        axes.append((np.arange(count) + 0.5) * dx - 0.5 * count * dx)
    grid = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grid], axis=1)
    if params.jitter > 0:
        rng = np.random.default_rng(params.seed)
        points += rng.uniform(-params.jitter, params.jitter, points.shape) * dx
    return points


def build_cloud(config: GradlabConfig) -> Cloud:
    params = config.cloud
    if params.snapshot is not None:
        columns = read_snapshot_csv(params.snapshot)
        positions = snapshot_positions(columns)
        values = (
            np.asarray(columns["T"], dtype=np.float64)
            if "T" in columns
            else kinked_field(positions, config.field)
        )
    else:
        positions = lattice_cloud(params)
        values = kinked_field(positions, config.field)
    volumes = np.full(len(positions), params.dx ** positions.shape[1])
    return Cloud(positions, volumes, values, params.dx)


def cloud_pairs(cloud: Cloud, spec: KernelSpec) -> PairList:
    pad = spec.radius + cloud.dx
    index = build_index(
        cloud.positions,
        spec.radius,
        cloud.positions.min(axis=0) - pad,
        cloud.positions.max(axis=0) + pad,
    )
    return index.pairs()


def particle_groups(
    cloud: Cloud, spec: KernelSpec, params: FieldParams
) -> Dict[str, np.ndarray]:
    points = cloud.positions
    edge_lo = points.min(axis=0) - 0.5 * cloud.dx
    edge_hi = points.max(axis=0) + 0.5 * cloud.dx
    truncated = np.any(
        (points - edge_lo < spec.radius) | (edge_hi - points < spec.radius), axis=1
    )
    point, normal, _ = interface_frame(params, cloud.dimension)
    near = np.abs((points - point) @ normal) < spec.radius
    return {
        "truncated": truncated,
        "band": ~truncated & near,
        "interior": ~truncated & ~near,
    }


@dataclass(frozen=True)
class ErrorRow:
    variant: str
    group: str
    quantity: str
    count: int
    l2: float
    linf: float


def gradient_errors(grads: FloatArray, reference: FloatArray) -> Tuple[float, float]:
    """Relative L2 and L-infinity errors; absolute where the reference is zero."""
    if grads.shape[0] == 0:
        return 0.0, 0.0
    diff = np.linalg.norm(grads - reference, axis=1)
    ref = np.linalg.norm(reference, axis=1)
    l2_ref = float(np.sqrt((ref**2).sum()))
    linf_ref = float(ref.max())
    l2 = float(np.sqrt((diff**2).sum()))
    linf = float(diff.max())
    return (
        l2 / l2_ref if l2_ref > 0 else l2,
        linf / linf_ref if linf_ref > 0 else linf,
    )


@dataclass
class GradientStudyReport:
    dimension: int
    particles: int
    groups: Dict[str, int]
    rows: List[ErrorRow] = field(default_factory=list)
    cspm_csph_max_relative: float = 0.0
    corrected_fallbacks: int = 0

    def error(self, variant: str, group: str, quantity: str = "tangential") -> float:
        for row in self.rows:
            if (row.variant, row.group, row.quantity) == (variant, group, quantity):
                return row.l2
        raise KeyError(f"No row for {variant}/{group}/{quantity}")

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(orjson.dumps(self.as_dict(), option=orjson.OPT_INDENT_2))
        return target

    def table(self) -> str:
        lines = [
            f"{'variant':<11}{'group':<11}{'quantity':<12}"
            f"{'n':>7}{'L2':>14}{'Linf':>14}"
        ]
        for row in self.rows:
            lines.append(
                f"{row.variant:<11}{row.group:<11}{row.quantity:<12}"
                f"{row.count:>7}{row.l2:>14.6e}{row.linf:>14.6e}"
            )
        lines.append(f"max |CSPM - CSPH| / |CSPH|: {self.cspm_csph_max_relative:.3e}")
        return "\n".join(lines)


def gradient_study(config: GradlabConfig) -> GradientStudyReport:
    """Compare all gradient variants against CSPH on one cloud."""
    cloud = build_cloud(config)
    spec = KernelSpec(h=cloud.dx, dimension=cloud.dimension)
    pairs = cloud_pairs(cloud, spec)
    groups = particle_groups(cloud, spec, config.field)
    _, normal, _ = interface_frame(config.field, cloud.dimension)
    normals = np.broadcast_to(normal, cloud.positions.shape)

    counters = GradientCounters()
    grads = {
        variant: gradient_field(
            cloud.values, cloud.volumes, pairs, spec, variant, counters
        )
        for variant in GradientVariant
    }
    reference = grads[REFERENCE]
    tangential = {v: project_tangential(g, normals) for v, g in grads.items()}

    report = GradientStudyReport(
        dimension=cloud.dimension,
        particles=len(cloud.positions),
        groups={name: int(mask.sum()) for name, mask in groups.items()},
        corrected_fallbacks=counters.corrected_fallbacks,
    )
    for variant in GradientVariant:
        for group in GROUPS:
            mask = groups[group]
            for quantity in QUANTITIES:
                source = tangential if quantity == "tangential" else grads
                ref = source[REFERENCE][mask]
                l2, linf = gradient_errors(source[variant][mask], ref)
                report.rows.append(
                    ErrorRow(variant.value, group, quantity, int(mask.sum()), l2, linf)
                )

    scale = np.linalg.norm(reference, axis=1)
    gap = np.linalg.norm(grads[GradientVariant.CSPM] - reference, axis=1)
    relative = gap / np.where(scale > 0, scale, 1.0)
    report.cspm_csph_max_relative = float(relative.max(initial=0.0))
    logger.info(
        "Gradient study on %d particles: asymmetric band tangential error %.3e",
        report.particles,
        report.error(GradientVariant.ASYMMETRIC.value, "band"),
    )
    if config.output.report is not None:
        report.write(config.output.report)
    return report
