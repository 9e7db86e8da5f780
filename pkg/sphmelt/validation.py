import math
from typing import Callable, Iterable, List, Optional, Sequence, Union

from sphmelt.model import Phase, ScenarioConfig

Number = Union[int, float]


class ValidationError(ValueError):
    """Invalid scenario or configuration; ``messages`` lists every problem found."""

    def __init__(self, messages: Union[str, Sequence[str]]) -> None:
        self.messages: List[str] = (
            [messages] if isinstance(messages, str) else list(messages)
        )
        super().__init__("\n".join(self.messages))


def error_msg(field: str, msg: str, line: Optional[int] = None) -> str:
    """Format error message for a scenario field."""
    suffix = f" (line {line})" if line is not None else ""
    return f'Field "{field}" error: {msg}{suffix}'


def check_number(
    field: str,
    value: Number,
    gt: Optional[Number] = None,
    ge: Optional[Number] = None,
    lt: Optional[Number] = None,
    le: Optional[Number] = None,
) -> List[str]:
    if gt is not None and not value > gt:
        return [error_msg(field, f"Value must be > {gt}")]
    if ge is not None and not value >= ge:
        return [error_msg(field, f"Value must be >= {ge}")]
    if lt is not None and not value < lt:
        return [error_msg(field, f"Value must be < {lt}")]
    if le is not None and not value <= le:
        return [error_msg(field, f"Value must be <= {le}")]
    return []


def check_dimensions(config: ScenarioConfig) -> List[str]:
    """Check that every vector has one entry per spatial dimension."""
    dim = config.dimension
    errors: List[str] = []

    def expect(field: str, values: Optional[Sequence[object]]) -> None:
        if values is not None and len(values) != dim:
            errors.append(error_msg(field, f"expected {dim} values, got {len(values)}"))

    domain = config.domain
    expect("domain.lower", domain.lower)
    expect("domain.upper", domain.upper)
    expect("domain.boundary", domain.boundary)
    expect("domain.gravity", domain.gravity)
    expect("domain.wall_velocity", domain.wall_velocity)
    expect("temperature.gradient", config.temperature.gradient)
    if config.laser is not None:
        expect("laser.direction", config.laser.direction)
        expect("laser.origin", config.laser.origin)
        expect("laser.velocity", config.laser.velocity)
        for t, point in config.laser.path:
            expect("laser.path", point)
    for name, region in config.regions.items():
        for attr in ("lower", "upper", "center", "semiaxes"):
            expect(f"region.{name}.{attr}", getattr(region, attr, None))
    return errors


def check_domain(config: ScenarioConfig) -> List[str]:
    """Check bounds, lattice fit and periodic lengths."""
    errors: List[str] = []
    domain = config.domain
    dx = config.numerics.dx
    radius = config.numerics.kappa * dx
    for axis, (lo, hi) in enumerate(zip(domain.lower, domain.upper)):
        if not hi > lo:
            errors.append(
                error_msg("domain.upper", f"axis {axis} upper bound must exceed {lo}")
            )
            continue
        cells = (hi - lo) / dx
        if abs(cells - round(cells)) > 1e-6 * max(1.0, cells):
            errors.append(
                error_msg(
                    "numerics.dx",
                    f"axis {axis} length {hi - lo:g} is not a multiple of dx={dx:g}",
                )
            )
        periodic = axis < len(domain.boundary) and domain.boundary[axis] == "periodic"
        if periodic and hi - lo < 2.0 * radius:
            errors.append(
                error_msg(
                    "domain.boundary",
                    f"periodic axis {axis} is shorter than twice the kernel support",
                )
            )
    sides = "xyz"[: config.dimension]
    for side in domain.wall_temperatures:
        if side[0] not in sides:
            errors.append(
                error_msg("domain.wall_temperatures", f"side {side} outside dimension")
            )
    return errors


def check_materials(config: ScenarioConfig) -> List[str]:
    """Check that referenced materials exist."""
    errors: List[str] = []
    known = set(config.materials)
    if config.fill.material not in known:
        errors.append(
            error_msg("fill.material", f"unknown material {config.fill.material!r}")
        )
    wall_material = config.domain.wall_material
    if wall_material is not None and wall_material not in known:
        errors.append(
            error_msg(
                "domain.wall_material",
                f"unknown material {config.domain.wall_material!r}",
            )
        )
    for name, region in config.regions.items():
        if region.material not in known:
            errors.append(
                error_msg(
                    f"region.{name}.material",
                    f"unknown material {region.material!r}",
                )
            )
    return errors


def check_phases(config: ScenarioConfig) -> List[str]:
    """Check that every phase present has reference and background pressures."""
    errors: List[str] = []
    present = {config.fill.phase} | {r.phase for r in config.regions.values()}
    if config.physics.phase_change and "solid" in present:
        present.add("liquid")
    if any(kind == "wall" for kind in config.domain.boundary):
        present.add("wall")
    for label in sorted(present):
        try:
            config.phase_numerics(Phase.from_label(label))
        except KeyError:
            errors.append(error_msg(f"phase.{label}", "section is required"))
    return errors


def check_numerics(config: ScenarioConfig) -> List[str]:
    errors: List[str] = []
    numerics = config.numerics
    errors += check_number("numerics.kappa", numerics.kappa, ge=3, le=3)
    errors += check_number("numerics.dt", numerics.dt, lt=config.scenario.end_time)
    if numerics.zeta_sl > 0:
        if numerics.t_max is None:
            errors.append(error_msg("numerics.t_max", "required when zeta_sl > 0"))
        else:
            for mat in config.materials.values():
                errors += check_number(
                    "numerics.t_max", numerics.t_max, ge=mat.melt_temperature
                )
    if config.output.interval is not None:
        errors += check_number(
            "output.interval", config.output.interval, ge=numerics.dt
        )
    return errors


def check_laser(config: ScenarioConfig) -> List[str]:
    laser = config.laser
    if laser is None:
        return []
    errors: List[str] = []
    if laser.path and laser.velocity is not None:
        errors.append(error_msg("laser.velocity", "give either path or velocity"))
    if not all(math.isfinite(x) for x in laser.origin):
        errors.append(error_msg("laser.origin", "must be finite"))
    return errors


ScenarioCheck = Callable[[ScenarioConfig], List[str]]

DEFAULT_CHECKS: List[ScenarioCheck] = [
    check_dimensions,
    check_domain,
    check_materials,
    check_phases,
    check_numerics,
    check_laser,
]


def scenario_check(
    config: ScenarioConfig, checks: Optional[Iterable[ScenarioCheck]] = None
) -> List[str]:
    """Run all cross-field checks and collect their messages."""
    errors: List[str] = []
    for check in checks if checks is not None else DEFAULT_CHECKS:
        errors.extend(check(config))
    return errors
