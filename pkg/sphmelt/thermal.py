"""Energy equation: conduction, laser heating and evaporative cooling."""

from typing import Any, Optional

import numpy as np

from sphmelt.interface import InterfaceFields, recoil_pressure
from sphmelt.kernel import KernelSpec, kernel_derivative
from sphmelt.model import LaserParams, Phase
from sphmelt.neighbors import FloatArray, PairList
from sphmelt.particles import ParticleSet


def conduction_divergence(
    particles: ParticleSet, pairs: PairList, spec: KernelSpec
) -> FloatArray:
    """Heat flux divergence with the harmonic-mean conductivity.

    (div q)_i = sum_j m_j 4 k_i k_j (T_j - T_i) / (rho_j (k_i + k_j) r_ij) dW

    Pairs with k_i + k_j = 0 carry no flux. Wall particles enter with their
    fixed temperature.
    """
    assert particles.props is not None
    k = particles.props.conductivity
    total = k[pairs.i] + k[pairs.j]
    sub = pairs.select(total > 0)
    i, j = sub.i, sub.j
    k_pair = 4.0 * k[i] * k[j] / (k[i] + k[j])
    T = particles.temperature
    dw = kernel_derivative(sub.r, spec)
    m, rho = particles.mass, particles.density
    return sub.accumulate(m[j] / rho[j] * k_pair * (T[j] - T[i]) / sub.r * dw)


def beam_profile(
    position: FloatArray, laser: LaserParams, t: float
) -> FloatArray:
    """Gaussian factor exp(-2 (d / r_w)^2), d the distance from the beam axis."""
    offset = position - laser.center(t)
    e = np.asarray(laser.direction, dtype=np.float64)
    radial = offset - (offset @ e)[:, None] * e
    d2 = np.einsum("ij,ij->i", radial, radial)
    return np.exp(-2.0 * d2 / laser.radius**2)


def laser_source(
    particles: ParticleSet,
    lg: InterfaceFields,
    sg: InterfaceFields,
    laser: LaserParams,
    t: float,
    scale: float = 1.0,
) -> FloatArray:
    """Volumetric laser heating chi <-n . e_l> s_l0 exp(-2 (d/r_w)^2) delta.

    Liquid particles use the lg interface, solid particles the sg interface;
    gas and wall particles receive nothing.
    """
    assert particles.props is not None
    out = np.zeros(len(particles))
    if not laser.is_on(t) or scale == 0.0:
        return out
    e = np.asarray(laser.direction, dtype=np.float64)
    gauss = beam_profile(particles.position, laser, t)
    peak = scale * laser.power_density * particles.props.absorptivity
    for phase, fields in ((Phase.LIQUID, lg), (Phase.SOLID, sg)):
        sel = (particles.phase == phase) & fields.valid
        facing = np.maximum(-(fields.normal[sel] @ e), 0.0)
        out[sel] = peak[sel] * facing * gauss[sel] * fields.delta[sel]
    return out


def specific_enthalpy(T: Any, mat: Any) -> Any:
    """h(T) = c_p (T - T_h0) for constant heat capacity."""
    h = mat.heat_capacity * (np.asarray(T) - mat.enthalpy_reference_temperature)
    return float(h) if np.ndim(h) == 0 else h


def evaporation_mass_flux(T: Any, mat: Any) -> Any:
    """m_dot = 0.82 c_s p_v(T) sqrt(C_M / T)."""
    T = np.asarray(T, dtype=np.float64)
    flux = (
        0.82
        * mat.sticking_constant
        * recoil_pressure(T, mat)
        * np.sqrt(mat.vapor_mass_constant / T)
    )
    return float(flux) if np.ndim(flux) == 0 else flux


def evaporation_loss(
    particles: ParticleSet, lg: InterfaceFields
) -> FloatArray:
    """Evaporative heat sink -m_dot (h_v + h(T)) delta_lg on liquid particles (<= 0)."""
    props = particles.props
    assert props is not None
    T = particles.temperature
    rate = evaporation_mass_flux(T, props) * (
        props.evaporation_enthalpy + specific_enthalpy(T, props)
    )
    out = np.minimum(-rate * lg.delta, 0.0)
    out[particles.phase != Phase.LIQUID] = 0.0
    return out


def energy_rate(
    particles: ParticleSet,
    conduction: Optional[FloatArray] = None,
    laser: Optional[FloatArray] = None,
    evaporation: Optional[FloatArray] = None,
) -> FloatArray:
    """dT/dt = (-div q + s_v + s_l) / (c_p rho); zero on wall particles."""
    assert particles.props is not None
    total = np.zeros(len(particles))
    if conduction is not None:
        total -= conduction
    if laser is not None:
        total += laser
    if evaporation is not None:
        total += evaporation
    rate = total / (particles.props.heat_capacity * particles.density)
    rate[particles.phase == Phase.WALL] = 0.0
    return rate
