"""Particle snapshots as CSV tables or legacy ASCII VTK polydata."""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, TextIO, Tuple, Union

import numpy as np

from sphmelt.neighbors import FloatArray
from sphmelt.particles import ParticleSet

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
VELOCITY = ("u", "v", "w")
FORMATS = ("csv", "vtk")


class SnapshotError(OSError):
    """A snapshot could not be written or read."""

    def __init__(self, path: Union[str, Path], reason: str) -> None:
        self.path = Path(path)
        super().__init__(f"Snapshot {self.path}: {reason}")


def snapshot_columns(
    particles: ParticleSet, fields: Optional[Mapping[str, FloatArray]] = None
) -> Dict[str, np.ndarray]:
    """Ordered snapshot columns.

    id, phase, position, velocity, rho, p, T, delta_lg and kappa; the last
    two come from ``fields`` and are zero when absent.
    """
    n, d = len(particles), particles.dimension
    fields = fields or {}
    columns: Dict[str, np.ndarray] = {
        "id": np.arange(n),
        "phase": particles.phase.astype(np.int64),
    }
    for k in range(d):
        columns[AXES[k]] = particles.position[:, k]
    for k in range(d):
        columns[VELOCITY[k]] = particles.velocity[:, k]
    columns["rho"] = particles.density
    columns["p"] = particles.pressure
    columns["T"] = particles.temperature
    columns["delta_lg"] = np.asarray(fields.get("delta_lg", np.zeros(n)))
    columns["kappa"] = np.asarray(fields.get("curvature", np.zeros(n)))
    return columns


def snapshot_name(step: int, fmt: str) -> str:
    return f"snapshot_{step:08d}.{fmt}"


def _write_csv(out: TextIO, columns: Dict[str, np.ndarray]) -> None:
    names = list(columns)
    out.write(",".join(names) + "\n")
    fmt = ["%d" if name in ("id", "phase") else "%.17g" for name in names]
    table = np.column_stack([columns[name].astype(np.float64) for name in names])
    np.savetxt(out, table, fmt=fmt, delimiter=",")


def _write_vtk(
    out: TextIO, columns: Dict[str, np.ndarray], dimension: int, time: float
) -> None:
    n = columns["id"].shape[0]

    def emit(line: str) -> None:
        out.write(line + "\n")

    def padded(names: Tuple[str, ...]) -> FloatArray:
        xyz = np.zeros((n, 3))
        for k in range(dimension):
            xyz[:, k] = columns[names[k]]
        return xyz

    emit("# vtk DataFile Version 3.0")
    emit(f"sphmelt particles t={time:.17g}")
    emit("ASCII")
    emit("DATASET POLYDATA")
    emit(f"POINTS {n} double")
    np.savetxt(out, padded(AXES), fmt="%.17g")
    emit(f"VERTICES {n} {2 * n}")
    np.savetxt(out, np.column_stack([np.ones(n), np.arange(n)]), fmt="%d")
    emit(f"POINT_DATA {n}")
    for name in ("id", "phase"):
        emit(f"SCALARS {name} int 1")
        emit("LOOKUP_TABLE default")
        np.savetxt(out, columns[name], fmt="%d")
    emit("VECTORS velocity double")
    np.savetxt(out, padded(VELOCITY), fmt="%.17g")
    for name in ("rho", "p", "T", "delta_lg", "kappa"):
        emit(f"SCALARS {name} double 1")
        emit("LOOKUP_TABLE default")
        np.savetxt(out, columns[name], fmt="%.17g")


def write_snapshot(
    particles: ParticleSet,
    time: float,
    path: Union[str, Path],
    fmt: str = "csv",
    fields: Optional[Mapping[str, FloatArray]] = None,
) -> Path:
    """Write one snapshot file.

    Raises:
        ValueError: Unknown format.
        SnapshotError: The file cannot be written.
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown snapshot format {fmt!r}, expected {FORMATS}")
    target = Path(path)
    columns = snapshot_columns(particles, fields)
    try:
        with target.open("w", encoding="ascii", newline="\n") as out:
            if fmt == "csv":
                _write_csv(out, columns)
            else:
                _write_vtk(out, columns, particles.dimension, time)
    except OSError as exc:
        raise SnapshotError(target, exc.strerror or str(exc)) from exc
    logger.debug("Wrote %s snapshot %s at t=%g", fmt, target, time)
    return target


def read_snapshot_csv(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """Columns of a CSV snapshot; ``id`` and ``phase`` as integers.

    Raises:
        SnapshotError: Missing file or malformed table.
    """
    source = Path(path)
    try:
        with source.open("r", encoding="ascii") as handle:
            header = handle.readline().strip().split(",")
            data = np.loadtxt(handle, delimiter=",", ndmin=2)
    except OSError as exc:
        raise SnapshotError(source, exc.strerror or str(exc)) from exc
    except ValueError as exc:
        raise SnapshotError(source, f"malformed table: {exc}") from exc
    if data.size and data.shape[1] != len(header):
        raise SnapshotError(
            source, f"{data.shape[1]} values per row, header names {len(header)}"
        )
    if not data.size:
        data = np.zeros((0, len(header)))
    columns: Dict[str, np.ndarray] = {}
    for k, name in enumerate(header):
        column = data[:, k]
        columns[name] = column.astype(np.int64) if name in ("id", "phase") else column
    return columns


def snapshot_positions(columns: Mapping[str, np.ndarray]) -> FloatArray:
    axes: List[np.ndarray] = [columns[a] for a in AXES if a in columns]
    return np.column_stack(axes)
