"""Conversion between experimental parameters and dimensionless problem data.

A spherical single-domain nanomagnet of radius R levitates between two
superconducting plates separated by L.  The image-dipole interaction
hinders its rotation with a barrier V0, and the kinetic-energy quantum
E_k = hbar^2 / (2 I) sets the natural energy unit.  Everything downstream
works with the dimensionless barrier v0 = V0 / E_k and fields
h_i = mu B_i / E_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import HBAR, MU_0, ZETA_3
from .errors import DomainError


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental inputs in SI units.

    radius_m, plate_separation_m and density_kg_m3 must be strictly
    positive; magnetization_A_m must be non-negative (zero gives the free
    rotor); the applied fields may take any sign.  The particle must fit
    in the gap: R < L / 2.
    """

    radius_m: float = 1.0e-9
    plate_separation_m: float = 8.4e-8
    density_kg_m3: float = 7.5e3
    magnetization_A_m: float = 1.0e6
    field_x_T: float = 0.0
    field_z_T: float = 0.0

    def __post_init__(self):
        for name in ("radius_m", "plate_separation_m", "density_kg_m3"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be strictly positive")
        if self.magnetization_A_m < 0.0:
            raise DomainError("magnetization_A_m must be non-negative")
        if not self.radius_m < self.plate_separation_m / 2.0:
            raise DomainError("radius_m must be smaller than plate_separation_m / 2")


@dataclass(frozen=True)
class DerivedScales:
    """Scales derived from :class:`PhysicalParams`.

    moment_A_m2     magnetic moment mu = M_s (4/3) pi R^3
    mass_kg         particle mass
    inertia_kg_m2   I = (2/5) m R^2
    kinetic_quantum_J   E_k = hbar^2 / (2 I)
    rate_scale_per_s    E_k / hbar; one dimensionless time unit is its inverse
    barrier_J       V0 = mu0 mu^2 zeta(3) / (8 pi L^3)
    v0, h_x, h_z    dimensionless barrier and fields
    """

    moment_A_m2: float
    mass_kg: float
    inertia_kg_m2: float
    kinetic_quantum_J: float
    rate_scale_per_s: float
    barrier_J: float
    v0: float
    h_x: float
    h_z: float


def derive_scales(p: PhysicalParams) -> DerivedScales:
    """Evaluate all derived scales for a parameter set."""
    volume = (4.0 / 3.0) * math.pi * p.radius_m**3
    moment = p.magnetization_A_m * volume
    mass = p.density_kg_m3 * volume
    inertia = 0.4 * mass * p.radius_m**2
    e_kin = HBAR**2 / (2.0 * inertia)
    barrier = MU_0 * moment**2 * ZETA_3 / (8.0 * math.pi * p.plate_separation_m**3)
    return DerivedScales(
        moment_A_m2=moment,
        mass_kg=mass,
        inertia_kg_m2=inertia,
        kinetic_quantum_J=e_kin,
        rate_scale_per_s=e_kin / HBAR,
        barrier_J=barrier,
        v0=barrier / e_kin,
        h_x=moment * p.field_x_T / e_kin,
        h_z=moment * p.field_z_T / e_kin,
    )


def field_from_dimensionless(h: float, scales: DerivedScales) -> float:
    """Magnetic field in tesla that realizes the dimensionless field h.

    Inverse of the h_i = mu B_i / E_k map; requires a finite magnetic moment.
    """
    if scales.moment_A_m2 <= 0.0:
        raise DomainError("field_from_dimensionless requires a positive magnetic moment")
    return h * scales.kinetic_quantum_J / scales.moment_A_m2
