"""
Weakly compressible fluid mechanics on particle pairs.

All pair sums run over a sorted ``PairList`` and are accumulated per
particle, so each force is evaluated once per direction and the pairwise
terms are antisymmetric by construction.
"""

from typing import Optional, Tuple

import numpy as np

from sphmelt.kernel import KernelSpec, kernel_derivative, kernel_value
from sphmelt.model import Phase
from sphmelt.neighbors import BoolArray, FloatArray, PairList
from sphmelt.particles import ParticleSet


def density_summation(
    particles: ParticleSet, pairs: PairList, spec: KernelSpec
) -> FloatArray:
    """rho_i = m_i sum_j W_ij, self term included."""
    w = kernel_value(pairs.r, spec)
    return particles.mass * (spec.self_value + pairs.accumulate(w))


def eos_pressure(rho: FloatArray, rho0: FloatArray, p0: FloatArray) -> FloatArray:
    """p = p0 (rho / rho0 - 1)."""
    return p0 * (np.asarray(rho) / rho0 - 1.0)


def eos_density(p: FloatArray, rho0: FloatArray, p0: FloatArray) -> FloatArray:
    """Inverse of ``eos_pressure``."""
    return rho0 * (np.asarray(p) / p0 + 1.0)


def _pair_volumes(particles: ParticleSet, pairs: PairList) -> FloatArray:
    V = particles.volume
    return V[pairs.i] ** 2 + V[pairs.j] ** 2


def mechanical_velocity(particles: ParticleSet) -> FloatArray:
    """Fluid velocities, with rigid particles replaced by their ghost velocity."""
    u = particles.velocity.copy()
    rigid = particles.rigid
    u[rigid] = particles.ghost_velocity[rigid]
    return u


def pressure_viscous_forces(
    particles: ParticleSet,
    pairs: PairList,
    spec: KernelSpec,
    viscosity: Optional[FloatArray] = None,
    pressure: bool = True,
    viscous: bool = True,
) -> FloatArray:
    """Pairwise pressure and viscous forces on fluid particles.

    F_i = sum_j (V_i^2 + V_j^2) [-p_ij dW e_ij + eta_ij u_ij / r_ij dW]

    with the density-weighted pressure p_ij = (rho_j p_i + rho_i p_j) /
    (rho_i + rho_j) and the harmonic viscosity mean eta_ij. Rigid neighbors
    enter with their extrapolated pressure and density, their ghost velocity
    and the viscosity of the fluid particle. Rigid rows are zero.

    Args:
        viscosity: Per-particle dynamic viscosity; defaults to the material value.
    """
    fluid = particles.fluid
    sub = pairs.select(fluid[pairs.i])
    i, j = sub.i, sub.j
    dw = kernel_derivative(sub.r, spec)
    vol = _pair_volumes(particles, sub)
    e = sub.unit
    force = np.zeros((len(sub), particles.dimension))

    if pressure:
        rho, p = particles.density, particles.pressure
        p_bar = (rho[j] * p[i] + rho[i] * p[j]) / (rho[i] + rho[j])
        force -= (vol * p_bar * dw)[:, None] * e

    if viscous:
        assert particles.props is not None
        eta = particles.props.viscosity if viscosity is None else viscosity
        eta_j = np.where(fluid[j], eta[j], eta[i])
        total = eta[i] + eta_j
        with np.errstate(divide="ignore", invalid="ignore"):
            eta_bar = np.where(total > 0, 2.0 * eta[i] * eta_j / total, 0.0)
        u = mechanical_velocity(particles)
        u_ij = u[i] - u[j]
        force += (vol * eta_bar * dw / sub.r)[:, None] * u_ij

    return sub.accumulate(force)


def transport_velocity_terms(
    particles: ParticleSet, pairs: PairList, spec: KernelSpec
) -> Tuple[FloatArray, FloatArray]:
    """Background-pressure acceleration and transport-velocity correction force.

    Returns:
        ``(a_b, F_A)`` where ``a_b`` advects particles with the transport
        velocity ``u~ = u + dt a_b`` and ``F_A`` is the momentum correction
        built from ``A = rho u (x) (u~ - u)``. Both are zero on rigid rows.
    """
    fluid = particles.fluid
    keep = fluid[pairs.i]
    sub = pairs.select(keep)
    i, j = sub.i, sub.j
    dw = kernel_derivative(sub.r, spec)
    vol = _pair_volumes(particles, sub)
    grad_w = dw[:, None] * sub.unit

    pb = particles.background_pressure
    a_b = -(pb / particles.mass)[:, None] * sub.accumulate(vol[:, None] * grad_w)
    a_b[~fluid] = 0.0

    rho = particles.density[:, None, None]
    u = particles.velocity
    A = rho * u[:, :, None] * (particles.transport_velocity - u)[:, None, :]
    A[~fluid] = 0.0
    A_bar = 0.5 * (A[i] + A[j])
    f_a = sub.accumulate(vol[:, None] * np.einsum("nab,nb->na", A_bar, grad_w))
    return a_b, f_a


def viscosity_ramp(T: FloatArray, T_m: FloatArray, T_max: float) -> FloatArray:
    """Solid-liquid viscosity weight: 1 at or below T_m, 0 at or above T_max."""
    T = np.asarray(T, dtype=np.float64)
    span = np.asarray(T_max - T_m, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = np.where(span > 0, (T_max - T) / span, 0.0)
    out = np.clip(ramp, 0.0, 1.0)
    out = np.where(T <= T_m, 1.0, out)
    return out


def zeta_field(
    particles: ParticleSet,
    delta_lg: FloatArray,
    zeta_lg: float,
    zeta_sl: float,
    t_max: Optional[float],
    sides: BoolArray,
) -> FloatArray:
    """Per-particle interface viscosity factor.

    ``zeta_lg * delta_lg`` on interface sides where the surface delta is
    numerically nonzero, plus ``zeta_sl`` times the solid-liquid ramp on
    liquid particles.
    """
    assert particles.props is not None
    h = particles.smoothing_length
    zeta = np.zeros(len(particles))
    if zeta_lg > 0:
        active = sides & (delta_lg > 1.0e-6 / h)
        zeta[active] = zeta_lg * delta_lg[active]
    if zeta_sl > 0:
        T_m = particles.props.melt_temperature
        T_max = T_m if t_max is None else np.full_like(T_m, t_max)
        liquid = particles.mask(Phase.LIQUID)
        ramp = viscosity_ramp(
            particles.temperature, T_m, T_max  # type: ignore[arg-type]
        )
        zeta[liquid] += zeta_sl * ramp[liquid]
    return zeta


def interface_viscous_force(
    particles: ParticleSet,
    pairs: PairList,
    spec: KernelSpec,
    zeta: FloatArray,
    eps: float = 0.01,
) -> FloatArray:
    """Artificial-viscosity stabilization of interfaces.

    F_i = m_i zeta_i sum_j m_j h_ij c_ij (u_ij . r_ij) /
          (rho_ij (r_ij^2 + eps h_ij^2)) dW e_ij

    with arithmetic means h_ij, c_ij, rho_ij. The force opposes approaching
    pairs. Its effective kinematic viscosity is 0.5 zeta h c / (d + 2).
    """
    active = zeta > 0
    keep = active[pairs.i]
    if not np.any(keep):
        return np.zeros_like(particles.position)
    sub = pairs.select(keep)
    i, j = sub.i, sub.j
    dw = kernel_derivative(sub.r, spec)
    m = particles.mass
    h = particles.smoothing_length
    c = particles.sound_speed
    rho = particles.density
    h_bar = 0.5 * (h[i] + h[j])
    c_bar = 0.5 * (c[i] + c[j])
    rho_bar = 0.5 * (rho[i] + rho[j])

    u = particles.velocity.copy()
    rigid = particles.rigid
    u[rigid] = particles.wall_velocity[rigid]
    approach = np.einsum("ij,ij->i", u[i] - u[j], sub.rij)
    weight = (
        m[j] * h_bar * c_bar * approach / (rho_bar * (sub.r**2 + eps * h_bar**2)) * dw
    )
    force = sub.accumulate(weight[:, None] * sub.unit)
    return (m * zeta)[:, None] * force

