"""
Scenario files: INI sections decoded into a validated ``ScenarioConfig``.

Values are JSON literals where they parse as such (numbers, booleans, arrays,
objects) and plain strings otherwise::

    [domain]
    lower = [0.0, 0.0]      # m
    boundary = ["periodic", "wall"]
    wall_mode = noslip

Dotted section names address nested tables: ``[phase.liquid]``,
``[material.steel]``, ``[region.drop]`` and ``[ramp.laser]``.
"""

import configparser
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import orjson
import pydantic

from sphmelt.model import ScenarioConfig
from sphmelt.validation import ValidationError, error_msg, scenario_check

logger = logging.getLogger(__name__)

Sections = Dict[str, Dict[str, Any]]
LineMap = Dict[Tuple[str, str], int]

TABLES = {
    "phase": ("numerics", "phases"),
    "material": ("materials",),
    "region": ("regions",),
    "ramp": ("ramps",),
}
TOP_LEVEL = (
    "scenario",
    "domain",
    "numerics",
    "fill",
    "temperature",
    "laser",
    "physics",
    "output",
)
REGION_SHAPES = ("block", "disc", "sphere", "ellipse", "powder")
MANIFEST_NAME = "manifest.json"


def decode_value(raw: str) -> Any:
    """JSON literal if ``raw`` is one, else the stripped string."""
    text = raw.strip()
    try:
        return orjson.loads(text)
    except orjson.JSONDecodeError:
        return text


def _line_map(text: str) -> LineMap:
    lines: LineMap = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            continue
        if line[0].isspace():
            continue
        for sep in ("=", ":"):
            if sep in stripped:
                key = stripped.split(sep, 1)[0].strip()
                lines.setdefault((section, key), number)
                break
    return lines


def parse_sections(
    text: str, source: str = "<string>"
) -> Tuple[Sections, LineMap]:
    """Tokenize scenario text into ``{section: {key: value}}`` plus key lines."""
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(error_msg(source, f"malformed scenario file: {exc}"))
    sections: Sections = {
        name: {key: decode_value(value) for key, value in parser.items(name)}
        for name in parser.sections()
    }
    return sections, _line_map(text)


def apply_overrides(sections: Sections, overrides: Iterable[str]) -> Sections:
    """Patch ``section.key=value`` assignments into parsed sections.

    The key is the part after the last dot, so ``phase.liquid.p0=1e7`` sets
    ``p0`` in ``[phase.liquid]``.
    """
    patched = {name: dict(values) for name, values in sections.items()}
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().rpartition(".")
        if not sep or not dot or not section or not key:
            raise ValidationError(
                error_msg(item, "override must look like section.key=value")
            )
        patched.setdefault(section, {})[key] = decode_value(value)
        logger.debug("Override %s.%s = %s", section, key, value.strip())
    return patched


def _nest(sections: Sections) -> Tuple[Dict[str, Any], List[str]]:
    data: Dict[str, Any] = {}
    errors: List[str] = []
    for name, values in sections.items():
        prefix, dot, rest = name.partition(".")
        if not dot:
            if name not in TOP_LEVEL:
                errors.append(error_msg(name, "unknown section"))
                continue
            data.setdefault(name, {}).update(values)
            continue
        if prefix not in TABLES or not rest:
            errors.append(error_msg(name, "unknown section"))
            continue
        table = data
        for key in TABLES[prefix]:
            table = table.setdefault(key, {})
        table[rest] = dict(values)
    return data, errors


def _section_key(loc: Tuple[Union[int, str], ...]) -> Tuple[str, str]:
    """Map a pydantic error location back to ``(section, key)``."""
    parts = [str(p) for p in loc]
    if not parts:
        return "", ""
    head = parts[0]
    if head == "numerics" and len(parts) >= 3 and parts[1] == "phases":
        return f"phase.{parts[2]}", ".".join(parts[3:])
    for prefix, path in TABLES.items():
        if len(path) == 1 and head == path[0] and len(parts) >= 2:
            rest = parts[2:]
            if prefix == "region" and rest and rest[0] in REGION_SHAPES:
                rest = rest[1:]
            return f"{prefix}.{parts[1]}", ".".join(rest)
    return head, ".".join(parts[1:])


def pydantic_messages(
    exc: pydantic.ValidationError, lines: Optional[LineMap]
) -> List[str]:
    messages = []
    for err in exc.errors():
        section, key = _section_key(tuple(err["loc"]))
        field = f"{section}.{key}" if key else section
        line = None
        if lines is not None:
            line = lines.get((section, key.split(".")[0])) or lines.get((section, ""))
        messages.append(error_msg(field, err["msg"], line))
    return messages


def build_config(
    sections: Sections, lines: Optional[LineMap] = None
) -> ScenarioConfig:
    """Validate parsed sections into a ``ScenarioConfig``.

    Raises:
        ValidationError: With every problem found, field and line included.
    """
    data, errors = _nest(sections)
    if errors:
        raise ValidationError(errors)
    try:
        config = ScenarioConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        raise ValidationError(pydantic_messages(exc, lines)) from None
    problems = scenario_check(config)
    if problems:
        raise ValidationError(problems)
    return config


def write_manifest(config: ScenarioConfig, directory: Union[str, Path]) -> Path:
    """Echo the fully resolved configuration as JSON."""
    path = Path(directory) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(
        orjson.dumps(config.model_dump(mode="json"), option=orjson.OPT_INDENT_2)
    )
    return path


def load_scenario(
    path: Union[str, Path],
    overrides: Optional[Iterable[str]] = None,
    manifest_dir: Optional[Union[str, Path]] = None,
) -> ScenarioConfig:
    """Read, override, validate and optionally echo a scenario file.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ValidationError: Unknown keys, missing fields or violated checks.
    """
    source = Path(path)
    text = source.read_text(encoding="utf-8")
    sections, lines = parse_sections(text, str(source))
    if overrides:
        sections = apply_overrides(sections, overrides)
    config = build_config(sections, lines)
    logger.info("Loaded scenario %s from %s", config.scenario.name, source)
    if manifest_dir is not None:
        manifest = write_manifest(config, manifest_dir)
        logger.info("Wrote %s", manifest)
    return config


def scenario_names() -> List[str]:
    """Names of the scenarios shipped with the package."""
    folder = resources.files("sphmelt") / "scenarios"
    return sorted(
        entry.name[: -len(".cfg")]
        for entry in folder.iterdir()
        if entry.name.endswith(".cfg")
    )


def scenario_path(name: str) -> Path:
    """Path of a shipped scenario file.

    Raises:
        KeyError: No scenario of that name is shipped.
    """
    entry = resources.files("sphmelt") / "scenarios" / f"{name}.cfg"
    if not entry.is_file():
        known = ", ".join(scenario_names())
        raise KeyError(f"Unknown scenario {name!r}; known: {known}")
    return Path(str(entry))


def scale_resolution(config: ScenarioConfig, scale: float) -> ScenarioConfig:
    """Coarsen (scale > 1) or refine a scenario.

    ``dx`` is multiplied by ``scale``; ``dt`` by the stricter of the acoustic
    (``scale``) and capillary (``scale ** 1.5``) factors.
    """
    if scale <= 0:
        raise ValueError(f"Resolution scale must be > 0, got {scale}")
    if scale == 1:
        return config
    numerics = config.numerics
    dt_factor = min(scale, scale**1.5)
    changes: Dict[str, Any] = {
        "dx": numerics.dx * scale,
        "dt": numerics.dt * dt_factor,
    }
    if numerics.eps_curv is not None:
        changes["eps_curv"] = numerics.eps_curv / scale
    if numerics.wetting_blend_distance is not None:
        changes["wetting_blend_distance"] = numerics.wetting_blend_distance * scale
    scaled = config.model_copy(
        update={"numerics": numerics.model_copy(update=changes)}
    )
    problems = scenario_check(scaled)
    if problems:
        raise ValidationError(problems)
    logger.info(
        "Resolution scale %g: dx %g -> %g, dt %g -> %g",
        scale,
        numerics.dx,
        scaled.numerics.dx,
        numerics.dt,
        scaled.numerics.dt,
    )
    return scaled
