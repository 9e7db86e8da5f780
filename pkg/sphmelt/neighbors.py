"""
Uniform-grid cell list for fixed-radius neighbor search.

Particles are binned into cells whose edge is at least the search radius,
so every neighbor of a particle lies in the 3^d block of cells around it.
Periodic axes are handled with minimum-image offsets; the resulting pair
list stores ``r_ij = r_i - r_j`` already corrected for the image.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]


class OutOfDomainError(ValueError):
    """A particle lies outside a non-periodic axis of the index domain."""

    def __init__(self, particle: int, position: Sequence[float]) -> None:
        self.particle = particle
        self.position = tuple(float(x) for x in position)
        super().__init__(
            f"Particle {particle} at {self.position} is outside the domain"
        )


@dataclass
class PairList:
    """Directed neighbor pairs sorted by (i, j).

    Every unordered pair within the radius appears twice, once per
    direction. ``skipped`` counts coincident pairs (``r_ij == 0`` for
    ``i != j``) that were dropped because their direction is undefined.
    """

    i: IntArray
    j: IntArray
    rij: FloatArray
    r: FloatArray
    size: int
    skipped: int = 0
    _unit: Optional[FloatArray] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return int(self.i.shape[0])

    @property
    def unit(self) -> FloatArray:
        """Unit vectors e_ij pointing from j to i."""
        if self._unit is None:
            self._unit = self.rij / self.r[:, None]
        return self._unit

    def accumulate(self, values: npt.ArrayLike) -> FloatArray:
        """Sum per-pair values onto their first particle.

        Sums run in pair order, so results do not depend on how the
        pairs were produced.
        """
        data = np.asarray(values, dtype=np.float64)
        if data.ndim == 1:
            return np.bincount(self.i, weights=data, minlength=self.size)
        flat = data.reshape(data.shape[0], -1)
        out = np.empty((self.size, flat.shape[1]))
        for k in range(flat.shape[1]):
            out[:, k] = np.bincount(self.i, weights=flat[:, k], minlength=self.size)
        return out.reshape((self.size,) + data.shape[1:])

    def select(self, mask: BoolArray) -> "PairList":
        """Pairs for which ``mask`` is set, order preserved."""
        unit = None if self._unit is None else self._unit[mask]
        return PairList(
            i=self.i[mask],
            j=self.j[mask],
            rij=self.rij[mask],
            r=self.r[mask],
            size=self.size,
            skipped=self.skipped,
            _unit=unit,
        )

    def span(self, particle: int) -> Tuple[int, int]:
        lo, hi = np.searchsorted(self.i, [particle, particle + 1])
        return int(lo), int(hi)


def wrap_periodic(
    positions: FloatArray,
    lower: FloatArray,
    upper: FloatArray,
    periodic: Sequence[bool],
) -> int:
    """Wrap positions into ``[lower, upper)`` along periodic axes, in place.

    Only particles outside the primary cell are touched, so coordinates that
    are already inside stay bit-identical. Returns the number of wrapped
    coordinates.
    """
    wrapped = 0
    for axis, is_periodic in enumerate(periodic):
        if not is_periodic:
            continue
        lo, hi = float(lower[axis]), float(upper[axis])
        length = hi - lo
        column = positions[:, axis]
        outside = (column < lo) | (column >= hi)
        if not np.any(outside):
            continue
        moved = lo + np.mod(column[outside] - lo, length)
        moved[moved >= hi] = lo
        column[outside] = moved
        wrapped += int(np.count_nonzero(outside))
    return wrapped


class NeighborIndex:
    """Cell list over a box with per-axis periodicity."""

    __slots__ = (
        "positions",
        "radius",
        "lower",
        "upper",
        "periodic",
        "cell_size",
        "shape",
        "cell_of",
        "order",
        "cell_start",
        "cell_count",
        "_pairs",
    )

    def __init__(
        self,
        positions: FloatArray,
        radius: float,
        lower: FloatArray,
        upper: FloatArray,
        periodic: Tuple[bool, ...],
    ) -> None:
        self.positions = positions
        self.radius = radius
        self.lower = lower
        self.upper = upper
        self.periodic = periodic
        extent = upper - lower
        self.shape = np.maximum(1, np.floor(extent / radius).astype(np.int64))
        self.cell_size = extent / self.shape

        coords = np.floor((positions - lower) / self.cell_size).astype(np.int64)
        coords = np.clip(coords, 0, self.shape - 1)
        self.cell_of = coords
        linear = np.ravel_multi_index(tuple(coords.T), tuple(self.shape))
        self.order = np.argsort(linear, kind="stable")
        total = int(np.prod(self.shape))
        self.cell_count = np.bincount(linear, minlength=total)
        self.cell_start = np.cumsum(self.cell_count) - self.cell_count
        self._pairs: Optional[PairList] = None

    def __len__(self) -> int:
        return int(self.positions.shape[0])

    def __repr__(self) -> str:
        return (
            f"NeighborIndex(particles={len(self)}, cells={tuple(self.shape)}, "
            f"radius={self.radius})"
        )

    @property
    def dimension(self) -> int:
        return int(self.positions.shape[1])

    def pairs(self) -> PairList:
        if self._pairs is None:
            self._pairs = self._build_pairs()
        return self._pairs

    def _build_pairs(self) -> PairList:
        n = len(self)
        dim = self.dimension
        extent = self.upper - self.lower
        particles = np.arange(n, dtype=np.int64)
        chunks_i: List[IntArray] = []
        chunks_j: List[IntArray] = []
        chunks_rij: List[FloatArray] = []
        skipped = 0

        for offset in itertools.product((-1, 0, 1), repeat=dim):
            target = self.cell_of + np.asarray(offset, dtype=np.int64)
            shift = np.zeros((n, dim))
            valid = np.ones(n, dtype=bool)
            for axis in range(dim):
                size = self.shape[axis]
                column = target[:, axis]
                if self.periodic[axis]:
                    low = column < 0
                    high = column >= size
                    column[low] += size
                    column[high] -= size
                    shift[low, axis] = -extent[axis]
                    shift[high, axis] = extent[axis]
                else:
                    valid &= (column >= 0) & (column < size)
            if not np.any(valid):
                continue

            source = particles[valid]
            linear = np.ravel_multi_index(tuple(target[valid].T), tuple(self.shape))
            counts = self.cell_count[linear]
            total = int(counts.sum())
            if total == 0:
                continue
            first = np.cumsum(counts) - counts
            within = np.arange(total) - np.repeat(first, counts)
            pi = np.repeat(source, counts)
            pj = self.order[np.repeat(self.cell_start[linear], counts) + within]
            image = np.repeat(shift[valid], counts, axis=0)

            rij = self.positions[pi] - (self.positions[pj] + image)
            dist2 = np.einsum("ij,ij->i", rij, rij)
            keep = dist2 < self.radius * self.radius
            coincident = keep & (dist2 == 0.0)
            same = pi == pj
            skipped += int(np.count_nonzero(coincident & ~same))
            keep &= ~coincident
            chunks_i.append(pi[keep])
            chunks_j.append(pj[keep])
            chunks_rij.append(rij[keep])

        if chunks_i:
            pi = np.concatenate(chunks_i)
            pj = np.concatenate(chunks_j)
            rij = np.concatenate(chunks_rij)
        else:
            pi = np.zeros(0, dtype=np.int64)
            pj = np.zeros(0, dtype=np.int64)
            rij = np.zeros((0, dim))
        order = np.lexsort((pj, pi))
        pi, pj, rij = pi[order], pj[order], rij[order]
        r = np.sqrt(np.einsum("ij,ij->i", rij, rij))
        if skipped:
            logger.warning("Skipped %d coincident particle pairs", skipped)
        return PairList(i=pi, j=pj, rij=rij, r=r, size=n, skipped=skipped)

    def neighbors_of(self, particle: int) -> List[Tuple[int, FloatArray, float]]:
        return neighbors_of(self, particle)


def build_index(
    positions: npt.ArrayLike,
    radius: float,
    lower: npt.ArrayLike,
    upper: npt.ArrayLike,
    periodic: Optional[Sequence[bool]] = None,
) -> NeighborIndex:
    """Bin particles into a uniform grid of cells no smaller than ``radius``.

    Args:
        positions: (N, d) particle coordinates.
        radius: Search radius r_c.
        lower: Lower domain corner.
        upper: Upper domain corner.
        periodic: Per-axis periodicity flags; defaults to no periodic axis.

    Returns:
        NeighborIndex whose ``pairs()`` holds every directed pair closer
        than ``radius`` (minimum image on periodic axes).

    Raises:
        OutOfDomainError: A particle lies outside a non-periodic axis.
        ValueError: A periodic axis is shorter than twice the radius.
    """
    points = np.array(positions, dtype=np.float64, ndmin=2)
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    dim = points.shape[1]
    flags = tuple(bool(p) for p in (periodic or (False,) * dim))
    if radius <= 0:
        raise ValueError(f"Search radius must be > 0, got {radius}")
    if lo.shape != (dim,) or hi.shape != (dim,) or len(flags) != dim:
        raise ValueError(f"Domain bounds and periodicity must have {dim} entries")
    if np.any(hi <= lo):
        raise ValueError("Domain upper bounds must exceed lower bounds")

    for axis, is_periodic in enumerate(flags):
        if is_periodic and hi[axis] - lo[axis] < 2.0 * radius:
            raise ValueError(
                f"Periodic axis {axis} has length {hi[axis] - lo[axis]}, "
                f"shorter than twice the search radius {radius}"
            )

    if any(flags):
        wrap_periodic(points, lo, hi, flags)

    closed = np.array([not p for p in flags])
    if np.any(closed):
        outside = np.any(
            ((points < lo) | (points > hi)) & closed[None, :], axis=1
        )
        if np.any(outside):
            bad = int(np.flatnonzero(outside)[0])
            raise OutOfDomainError(bad, points[bad])

    return NeighborIndex(points, float(radius), lo, hi, flags)


def neighbors_of(
    index: NeighborIndex, particle: int
) -> List[Tuple[int, FloatArray, float]]:
    """Neighbors of one particle as ``(j, r_ij vector, r_ij)`` tuples.

    Raises:
        IndexError: ``particle`` is not a valid particle id.
    """
    if not 0 <= particle < len(index):
        raise IndexError(f"Particle id {particle} out of range [0, {len(index)})")
    pairs = index.pairs()
    lo, hi = pairs.span(particle)
    return [
        (int(pairs.j[k]), pairs.rij[k].copy(), float(pairs.r[k]))
        for k in range(lo, hi)
    ]
