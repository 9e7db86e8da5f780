"""
Quintic spline kernel and SPH gradient operators.

The kernel is the quintic spline with support radius r_c = 3h::

    W(q) = sigma_d [(3-q)^5 - 6(2-q)^5 + 15(1-q)^5],   q = r / h

where each bracketed term only contributes while its base is positive and
sigma_d is 1/(120h), 7/(478 pi h^2) or 3/(359 pi h^3) in 1, 2 and 3
dimensions.

Gradient operators come in two forms: per-particle functions taking
``FieldSample`` records (``grad_standard`` ... ``grad_corrected``) and the
vectorized ``gradient_field`` working on a whole ``PairList``. Both share the
same pair sums.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union, overload

import numpy as np
import numpy.typing as npt

from sphmelt.neighbors import FloatArray, PairList

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1.0e12
"""Largest accepted condition number of the gradient correction matrix."""

_SIGMA = {
    1: 1.0 / 120.0,
    2: 7.0 / (478.0 * math.pi),
    3: 3.0 / (359.0 * math.pi),
}


class KernelDomainError(ValueError):
    """Kernel argument outside its domain (negative distance, bad normal)."""

    pass


@dataclass(frozen=True)
class KernelSpec:
    """Quintic spline parameters.

    Args:
        h: Smoothing length, equal to the initial particle spacing.
        kappa: Support scaling; the quintic spline is fixed at 3.
        dimension: Spatial dimension (1, 2 or 3).
    """

    h: float
    kappa: float = 3.0
    dimension: int = 2

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise KernelDomainError(f"Smoothing length must be > 0, got {self.h}")
        if self.dimension not in _SIGMA:
            raise KernelDomainError(
                f"Dimension must be 1, 2 or 3, got {self.dimension}"
            )
        if self.kappa != 3.0:
            raise KernelDomainError(
                f"Quintic spline support is 3h, kappa={self.kappa} not supported"
            )

    @property
    def radius(self) -> float:
        """Support radius r_c = kappa * h."""
        return self.kappa * self.h

    @property
    def sigma(self) -> float:
        return _SIGMA[self.dimension] / self.h**self.dimension

    @property
    def self_value(self) -> float:
        """W(0) = 66 sigma."""
        return 66.0 * self.sigma


Distance = Union[float, npt.ArrayLike]


def _as_distance(r: Distance) -> FloatArray:
    q = np.asarray(r, dtype=np.float64)
    if np.any(q < 0) or np.any(np.isnan(q)):
        raise KernelDomainError("Kernel distance must be >= 0")
    return q


@overload
def kernel_value(r: float, spec: KernelSpec) -> float: ...


@overload
def kernel_value(r: FloatArray, spec: KernelSpec) -> FloatArray: ...


def kernel_value(r, spec):  # type: ignore[no-untyped-def]
    """Kernel W(r, h); exactly zero for r >= 3h.

    Raises:
        KernelDomainError: ``r`` is negative.
    """
    q = _as_distance(r) / spec.h
    t3 = np.clip(3.0 - q, 0.0, None)
    t2 = np.clip(2.0 - q, 0.0, None)
    t1 = np.clip(1.0 - q, 0.0, None)
    w = spec.sigma * (t3**5 - 6.0 * t2**5 + 15.0 * t1**5)
    return float(w) if np.ndim(w) == 0 else w


@overload
def kernel_derivative(r: float, spec: KernelSpec) -> float: ...


@overload
def kernel_derivative(r: FloatArray, spec: KernelSpec) -> FloatArray: ...


def kernel_derivative(r, spec):  # type: ignore[no-untyped-def]
    """Radial derivative dW/dr; non-positive, zero at r = 0 and r >= 3h.

    Raises:
        KernelDomainError: ``r`` is negative.
    """
    q = _as_distance(r) / spec.h
    t3 = np.clip(3.0 - q, 0.0, None)
    t2 = np.clip(2.0 - q, 0.0, None)
    t1 = np.clip(1.0 - q, 0.0, None)
    dw = (spec.sigma / spec.h) * (-5.0 * t3**4 + 30.0 * t2**4 - 75.0 * t1**4)
    return float(dw) if np.ndim(dw) == 0 else dw


class GradientVariant(str, Enum):
    STANDARD = "standard"
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"
    CSPM = "cspm"
    CSPH = "csph"

    @property
    def corrected(self) -> bool:
        return self in (GradientVariant.CSPM, GradientVariant.CSPH)


@dataclass
class GradientCounters:
    """Diagnostic counters shared by the gradient operators."""

    skipped_pairs: int = 0
    corrected_fallbacks: int = 0

    def reset(self) -> None:
        self.skipped_pairs = 0
        self.corrected_fallbacks = 0


@dataclass(frozen=True)
class FieldSample:
    """A field value carried by one particle."""

    value: float
    position: Tuple[float, ...]
    volume: float
    density: float

    def __post_init__(self) -> None:
        if not self.volume > 0:
            raise ValueError(f"Sample volume must be > 0, got {self.volume}")
        if not self.density > 0:
            raise ValueError(f"Sample density must be > 0, got {self.density}")


def gradient_field(
    values: FloatArray,
    volumes: FloatArray,
    pairs: PairList,
    spec: KernelSpec,
    variant: GradientVariant = GradientVariant.ASYMMETRIC,
    counters: Optional[GradientCounters] = None,
) -> FloatArray:
    """Gradient of a particle field for every particle.

    Args:
        values: Field value per particle.
        volumes: Particle volume V = m / rho.
        pairs: Neighbor pairs (self and coincident pairs excluded).
        spec: Kernel parameters.
        variant: Gradient approximation.
        counters: Optional diagnostics; corrected variants count fallbacks.

    Returns:
        (N, d) gradient array.
    """
    i, j = pairs.i, pairs.j
    dw = kernel_derivative(pairs.r, spec)
    e = pairs.unit
    if variant is GradientVariant.STANDARD:
        weight = volumes[j] * values[j] * dw
        return pairs.accumulate(weight[:, None] * e)
    if variant is GradientVariant.SYMMETRIC:
        weight = (
            (volumes[i] ** 2 + volumes[j] ** 2)
            * 0.5
            * (values[i] + values[j])
            * dw
            / volumes[i]
        )
        return pairs.accumulate(weight[:, None] * e)

    grad_w = dw[:, None] * e
    rhs = pairs.accumulate((volumes[j] * (values[j] - values[i]))[:, None] * grad_w)
    if variant is GradientVariant.ASYMMETRIC:
        return rhs
    return _corrected(rhs, volumes, pairs, grad_w, variant, counters)


def _corrected(
    rhs: FloatArray,
    volumes: FloatArray,
    pairs: PairList,
    grad_w: FloatArray,
    variant: GradientVariant,
    counters: Optional[GradientCounters],
) -> FloatArray:
    # moment[i] = sum_j V_j (r_j - r_i) (x) grad_i W_ij
    moment = pairs.accumulate(
        volumes[pairs.j][:, None, None]
        * (-pairs.rij)[:, :, None]
        * grad_w[:, None, :]
    )
    # CSPM solves the component system sum_a g_a M_ab = rhs_b, i.e. M^T g = rhs;
    # CSPH inverts B = sum_j V_j grad_i W_ij (x) (r_j - r_i) = M^T explicitly.
    system = np.swapaxes(moment, 1, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(system)
    good = np.isfinite(cond) & (cond <= CONDITION_LIMIT)

    out = rhs.copy()
    if np.any(good):
        if variant is GradientVariant.CSPM:
            out[good] = np.linalg.solve(system[good], rhs[good][..., None])[..., 0]
        else:
            correction = np.linalg.inv(system[good])
            out[good] = np.einsum("nab,nb->na", correction, rhs[good])
    fallbacks = int(np.count_nonzero(~good))
    if fallbacks:
        logger.debug(
            "%s correction matrix ill-conditioned for %d particles; "
            "using asymmetric gradient",
            variant.value,
            fallbacks,
        )
        if counters is not None:
            counters.corrected_fallbacks += fallbacks
    return out


def _local_pairs(
    center: FieldSample,
    samples: Sequence[FieldSample],
    counters: Optional[GradientCounters],
) -> Tuple[FloatArray, FloatArray, PairList]:
    origin = np.asarray(center.position, dtype=np.float64)
    points = np.array([s.position for s in samples], dtype=np.float64).reshape(
        len(samples), origin.shape[0]
    )
    rij = origin[None, :] - points
    r = np.sqrt(np.einsum("ij,ij->i", rij, rij))
    keep = r > 0.0
    skipped = int(np.count_nonzero(~keep))
    if skipped and counters is not None:
        counters.skipped_pairs += skipped
    values = np.array([center.value] + [s.value for s in samples])
    volumes = np.array([center.volume] + [s.volume for s in samples])
    index = np.flatnonzero(keep)
    pairs = PairList(
        i=np.zeros(index.shape[0], dtype=np.int64),
        j=index.astype(np.int64) + 1,
        rij=rij[keep],
        r=r[keep],
        size=len(samples) + 1,
        skipped=skipped,
    )
    return values, volumes, pairs


def _local_gradient(
    center: FieldSample,
    samples: Sequence[FieldSample],
    spec: KernelSpec,
    variant: GradientVariant,
    counters: Optional[GradientCounters],
) -> FloatArray:
    values, volumes, pairs = _local_pairs(center, samples, counters)
    return gradient_field(values, volumes, pairs, spec, variant, counters)[0]


def grad_standard(
    center: FieldSample,
    samples: Sequence[FieldSample],
    spec: KernelSpec,
    counters: Optional[GradientCounters] = None,
) -> FloatArray:
    """Standard SPH gradient: sum_j V_j T_j dW/dr e_ij."""
    return _local_gradient(center, samples, spec, GradientVariant.STANDARD, counters)


def grad_symmetric(
    center: FieldSample,
    samples: Sequence[FieldSample],
    spec: KernelSpec,
    counters: Optional[GradientCounters] = None,
) -> FloatArray:
    """Momentum-conserving form.

    (1/V_i) sum_j (V_i^2 + V_j^2) (T_i + T_j)/2 dW/dr e_ij
    """
    return _local_gradient(center, samples, spec, GradientVariant.SYMMETRIC, counters)


def grad_asymmetric(
    center: FieldSample,
    samples: Sequence[FieldSample],
    spec: KernelSpec,
    counters: Optional[GradientCounters] = None,
) -> FloatArray:
    """Difference form: sum_j V_j (T_j - T_i) dW/dr e_ij; zero for constant fields."""
    return _local_gradient(center, samples, spec, GradientVariant.ASYMMETRIC, counters)


def grad_corrected(
    center: FieldSample,
    samples: Sequence[FieldSample],
    spec: KernelSpec,
    method: Union[GradientVariant, str] = GradientVariant.CSPH,
    counters: Optional[GradientCounters] = None,
) -> FloatArray:
    """First-order consistent gradient (CSPM or CSPH).

    Reproduces affine fields exactly wherever the correction matrix is
    invertible. Matrices with a condition number above ``CONDITION_LIMIT``
    fall back to ``grad_asymmetric`` and increment
    ``counters.corrected_fallbacks``.

    Examples:
        ```python
        spec = KernelSpec(h=1.0, dimension=2)
        center = FieldSample(1.0, (0.0, 0.0), 1.0, 1.0)
        grad = grad_corrected(center, neighbors, spec, "cspm")
        ```
    """
    variant = GradientVariant(method)
    if not variant.corrected:
        raise ValueError(
            f"Corrected gradient method must be CSPM or CSPH, got {method}"
        )
    return _local_gradient(center, samples, spec, variant, counters)


def tangential_projection(grad: npt.ArrayLike, normal: npt.ArrayLike) -> FloatArray:
    """Project a vector onto the plane orthogonal to ``normal``.

    Normals within [0.9, 1.1] of unit length are renormalized first.

    Raises:
        KernelDomainError: ``normal`` is far from unit length.
    """
    g = np.asarray(grad, dtype=np.float64)
    n = np.asarray(normal, dtype=np.float64)
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-8:
        if not 0.9 <= norm <= 1.1:
            raise KernelDomainError(f"Normal must have unit length, got norm {norm}")
        n = n / norm
    return g - np.dot(n, g) * n


def project_tangential(grads: FloatArray, normals: FloatArray) -> FloatArray:
    """Row-wise ``(I - n n) g`` for unit (or zero) normals."""
    return grads - np.einsum("ij,ij->i", grads, normals)[:, None] * normals
