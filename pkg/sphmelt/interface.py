"""
Interface fields and interface forces.

Three color-field pairings are distinguished:

- ``lg``: liquid against gas; rigid particles do not take part.
- ``sg``: rigid (solid and wall) against gas; liquid does not take part.
- ``sf``: rigid against fluid (liquid and gas merged).

Each pairing yields a density-weighted color gradient, an outward unit
normal (pointing away from the particle's own phase) and a surface delta.
Forces are returned per particle (not per unit volume).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from sphmelt.kernel import KernelSpec, kernel_derivative, kernel_value
from sphmelt.model import Phase
from sphmelt.neighbors import BoolArray, FloatArray, IntArray, PairList
from sphmelt.particles import ParticleSet

NORM_FLOOR = 1.0e-12


class Pairing(str, Enum):
    LG = "lg"
    SG = "sg"
    SF = "sf"

    def classes(self, phase: IntArray) -> Tuple[BoolArray, BoolArray]:
        """Participation mask and "first class" membership per particle."""
        liquid = phase == Phase.LIQUID
        gas = phase == Phase.GAS
        rigid = (phase == Phase.SOLID) | (phase == Phase.WALL)
        if self is Pairing.LG:
            return liquid | gas, liquid
        if self is Pairing.SG:
            return rigid | gas, rigid
        return np.ones_like(liquid), rigid


@dataclass
class InterfaceFields:
    """Color gradient, unit normal, surface delta and validity of one pairing."""

    pairing: Pairing
    gradient: FloatArray
    normal: FloatArray
    delta: FloatArray
    valid: BoolArray

    def with_normal(self, normal: FloatArray) -> "InterfaceFields":
        return InterfaceFields(
            self.pairing, self.gradient, normal, self.delta, self.valid
        )


@dataclass
class InterfaceFieldSet:
    lg: InterfaceFields
    sg: InterfaceFields
    sf: InterfaceFields
    curvature: FloatArray
    lg_raw: Optional[InterfaceFields] = None

    def __getitem__(self, pairing: Pairing) -> InterfaceFields:
        return getattr(self, Pairing(pairing).value)  # type: ignore[no-any-return]


def color_field_gradient(
    particles: ParticleSet, pairs: PairList, spec: KernelSpec, pairing: Pairing
) -> InterfaceFields:
    """Density-weighted color gradient of one phase pairing.

    grad c_i = (1 / V_i) sum_j (V_i^2 + V_j^2) c_ij dW e_ij, where
    c_ij = rho_i / (rho_i + rho_j) for pairs of different classes and 0
    otherwise. Particles outside the pairing get zero fields.
    """
    pairing = Pairing(pairing)
    member, first = pairing.classes(particles.phase)
    i, j = pairs.i, pairs.j
    cross = member[i] & member[j] & (first[i] != first[j])
    sub = pairs.select(cross)
    i, j = sub.i, sub.j
    V = particles.volume
    rho = particles.density
    c_bar = rho[i] / (rho[i] + rho[j])
    dw = kernel_derivative(sub.r, spec)
    weight = (V[i] ** 2 + V[j] ** 2) * c_bar * dw / V[i]
    gradient = sub.accumulate(weight[:, None] * sub.unit)
    gradient[~member] = 0.0

    delta = np.linalg.norm(gradient, axis=1)
    valid = delta > NORM_FLOOR
    normal = np.zeros_like(gradient)
    normal[valid] = gradient[valid] / delta[valid, None]
    delta[~valid] = 0.0
    return InterfaceFields(pairing, gradient, normal, delta, valid)


def curvature(
    particles: ParticleSet,
    pairs: PairList,
    spec: KernelSpec,
    lg: InterfaceFields,
    eps_curv: float,
) -> FloatArray:
    """Interface curvature from the divergence of the lg normal field.

    kappa_i = -(sum_j N_i N_j V_j (n_i - n_j) . dW e_ij) /
              (N_i V_i W(0) + sum_j N_i N_j V_j W_ij)

    with N_k = 1 where |grad c_k| > eps_curv. Normals of the opposite phase
    are flipped so both sides describe the same surface orientation.
    """
    member, liquid = Pairing.LG.classes(particles.phase)
    flag = member & (np.linalg.norm(lg.gradient, axis=1) > eps_curv)
    i, j = pairs.i, pairs.j
    sub = pairs.select(flag[i] & flag[j])
    i, j = sub.i, sub.j
    V = particles.volume
    flip = np.where(liquid[i] == liquid[j], 1.0, -1.0)
    n_ij = lg.normal[i] - flip[:, None] * lg.normal[j]
    dw = kernel_derivative(sub.r, spec)
    w = kernel_value(sub.r, spec)
    numerator = sub.accumulate(V[j] * dw * np.einsum("ij,ij->i", n_ij, sub.unit))
    denominator = V * spec.self_value + sub.accumulate(V[j] * w)
    kappa = np.zeros(len(particles))
    kappa[flag] = -numerator[flag] / denominator[flag]
    return kappa


def interface_sides(particles: ParticleSet, mode: str = "auto") -> BoolArray:
    """Particles receiving interface fluxes.

    ``two`` applies them to liquid and gas, ``one`` to the liquid only and
    ``auto`` picks ``one`` when the liquid/gas reference density ratio is at
    least 10.
    """
    assert particles.props is not None
    liquid = particles.mask(Phase.LIQUID)
    gas = particles.mask(Phase.GAS)
    if mode == "auto":
        if np.any(liquid) and np.any(gas):
            ratio = particles.props.rho0[liquid].max() / particles.props.rho0[gas].min()
            mode = "one" if ratio >= 10.0 else "two"
        else:
            mode = "two"
    if mode == "one":
        return liquid
    if mode == "two":
        return liquid | gas
    raise ValueError(f"Unknown interface side mode {mode!r}")


def surface_tension_normal_force(
    particles: ParticleSet,
    lg: InterfaceFields,
    kappa: FloatArray,
    alpha: FloatArray,
    sides: BoolArray,
) -> FloatArray:
    """F_i = -V_i alpha_i kappa_i n_i delta_i on the given sides."""
    scale = -particles.volume * alpha * kappa * lg.delta
    force = scale[:, None] * lg.normal
    force[~sides] = 0.0
    return force


def marangoni_force(
    particles: ParticleSet,
    lg: InterfaceFields,
    grad_T: FloatArray,
    slope: FloatArray,
    sides: BoolArray,
) -> FloatArray:
    """Tangential surface tension force.

    F_i = V_i (I - n n) grad T_i (d alpha/dT) delta_i

    ``slope`` is d alpha / dT (negative for metals), so the force pulls the
    interface toward colder regions.
    """
    n = lg.normal
    tangential = grad_T - np.einsum("ij,ij->i", grad_T, n)[:, None] * n
    force = (particles.volume * slope * lg.delta)[:, None] * tangential
    force[~sides] = 0.0
    return force


def wall_distance(
    particles: ParticleSet, pairs: PairList, sf: InterfaceFields
) -> FloatArray:
    """d_w,i = min_j ((r_j - r_i) . n_sf,i) - h over rigid neighbors j.

    Particles without rigid neighbors get inf.
    """
    rigid = particles.rigid
    sub = pairs.select(rigid[pairs.j] & ~rigid[pairs.i])
    projected = -np.einsum("ij,ij->i", sub.rij, sf.normal[sub.i])
    distance = np.full(len(particles), np.inf)
    np.minimum.at(distance, sub.i, projected)
    return distance - particles.smoothing_length


def _liquid_side_sign(particles: ParticleSet) -> FloatArray:
    return np.where(particles.phase == Phase.GAS, -1.0, 1.0)


def wetting_tangent(
    particles: ParticleSet, lg: InterfaceFields, sf: InterfaceFields
) -> Tuple[FloatArray, BoolArray]:
    """Unit projection of the liquid normal onto the wall plane.

    The tangent points along the wall from the liquid toward the gas. Rows
    where the liquid normal is parallel to the wall normal are flagged
    degenerate.
    """
    s = _liquid_side_sign(particles)[:, None]
    n_liq = s * lg.normal
    t = n_liq - np.einsum("ij,ij->i", n_liq, sf.normal)[:, None] * sf.normal
    norm = np.linalg.norm(t, axis=1)
    ok = lg.valid & sf.valid & (norm > 1.0e-8)
    tangent = np.zeros_like(t)
    tangent[ok] = t[ok] / norm[ok, None]
    degenerate = lg.valid & sf.valid & ~ok
    return tangent, degenerate


def wetting_normal_correction(
    particles: ParticleSet,
    pairs: PairList,
    lg: InterfaceFields,
    sf: InterfaceFields,
    theta0: FloatArray,
    d_max: float,
    counters: Optional[Dict[str, int]] = None,
) -> InterfaceFields:
    """Blend lg normals toward the normal prescribed by the contact angle.

    n_hat = t sin(theta0) - n_sf cos(theta0) with ``t`` from
    ``wetting_tangent``; blended with f = clamp(d_w / d_max, 0, 1) as
    f n + (1 - f) n_hat and renormalized. Gas-side normals are handled with
    flipped orientation. ``theta0`` is in radians.
    """
    tangent, degenerate = wetting_tangent(particles, lg, sf)
    s = _liquid_side_sign(particles)[:, None]
    prescribed = (
        tangent * np.sin(theta0)[:, None] - sf.normal * np.cos(theta0)[:, None]
    )
    if np.any(degenerate):
        fallback = -sf.normal[degenerate] * np.cos(theta0[degenerate])[:, None]
        norm = np.linalg.norm(fallback, axis=1)
        usable = norm > NORM_FLOOR
        rows = np.flatnonzero(degenerate)
        prescribed[rows[usable]] = fallback[usable] / norm[usable, None]
        prescribed[rows[~usable]] = (s * lg.normal)[rows[~usable]]
        if counters is not None:
            counters["wetting_normal_fallbacks"] = counters.get(
                "wetting_normal_fallbacks", 0
            ) + int(degenerate.sum())
    prescribed = s * prescribed

    f = np.clip(wall_distance(particles, pairs, sf) / d_max, 0.0, 1.0)
    target = lg.valid & sf.valid
    blended = lg.normal.copy()
    weight = f[target, None]
    mix = weight * lg.normal[target] + (1.0 - weight) * prescribed[target]
    norm = np.linalg.norm(mix, axis=1)
    good = norm > NORM_FLOOR
    rows = np.flatnonzero(target)
    blended[rows[good]] = mix[good] / norm[good, None]
    return lg.with_normal(blended)


def wetting_force(
    particles: ParticleSet,
    lg: InterfaceFields,
    sf: InterfaceFields,
    theta0: FloatArray,
    alpha: FloatArray,
    sides: BoolArray,
    counters: Optional[Dict[str, int]] = None,
) -> FloatArray:
    """Contact-line force.

    F_i = V_i alpha_i (cos theta0 - cos theta) t delta_lg delta_sf

    The current angle is measured through the liquid, cos theta = -n_liq . n_sf,
    using the uncorrected liquid normal.
    """
    tangent, degenerate = wetting_tangent(particles, lg, sf)
    if counters is not None and np.any(degenerate & sides):
        counters["wetting_force_skipped"] = counters.get(
            "wetting_force_skipped", 0
        ) + int(np.count_nonzero(degenerate & sides))
    s = _liquid_side_sign(particles)
    cos_theta = -s * np.einsum("ij,ij->i", lg.normal, sf.normal)
    imbalance = np.cos(theta0) - cos_theta
    scale = particles.volume * alpha * imbalance * lg.delta * sf.delta
    force = scale[:, None] * tangent
    force[~sides] = 0.0
    return force


def recoil_pressure(T: FloatArray, mat: object) -> FloatArray:
    """p_v(T) = C_P exp(-C_T (1/T - 1/T_v))."""
    T = np.asarray(T, dtype=np.float64)
    with np.errstate(over="ignore", under="ignore"):
        p = mat.recoil_pressure_constant * np.exp(  # type: ignore[attr-defined]
            -mat.recoil_temperature_constant  # type: ignore[attr-defined]
            * (1.0 / T - 1.0 / mat.boiling_temperature)  # type: ignore[attr-defined]
        )
    return float(p) if np.ndim(p) == 0 else p


def recoil_force(
    particles: ParticleSet,
    lg: InterfaceFields,
    p_v: FloatArray,
    sides: BoolArray,
) -> FloatArray:
    """F_i = -V_i p_v(T_i) n_i delta_i; pushes the surface into the liquid."""
    s = _liquid_side_sign(particles)
    scale = -particles.volume * p_v * lg.delta * s
    force = scale[:, None] * lg.normal
    force[~sides] = 0.0
    return force
