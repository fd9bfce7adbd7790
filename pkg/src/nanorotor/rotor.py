"""Rotor Hamiltonian in the truncated angular-momentum basis and its spectrum.

Basis states |n> with <theta|n> = e^{i n theta} / sqrt(2 pi) for
n = -N ... N.  The dimensionless Hamiltonian

    H = -d^2/dtheta^2 + (v0/2)(1 + cos 2 theta) - h_z cos theta - h_x sin theta

is pentadiagonal here: diagonal n^2 + v0/2, a +-2 band v0/4 from the
barrier, and a +-1 band combining the two field terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericsError
from .units import DerivedScales

OPERATOR_KINDS = ("cos_theta", "sin_theta", "cos_2theta", "sin_2theta", "l_theta",
                  "shift_up", "shift_down")

DEGENERACY_TOL = 1e-9          # eigenvalue clustering threshold, E_k units
_RESIDUAL_TOL = 1e-9           # eigenpair residual bound, relative to max |e|


@dataclass(frozen=True)
class DimensionlessConfig:
    """Dimensionless problem definition: barrier v0, fields h_x / h_z, cutoff N."""

    v0: float
    h_x: float = 0.0
    h_z: float = 0.0
    cutoff: int = 20

    def __post_init__(self):
        if self.v0 < 0.0:
            raise DomainError("v0 must be non-negative")
        if self.cutoff < 2:
            raise DomainError("cutoff must be at least 2")

    @property
    def dim(self) -> int:
        return 2 * self.cutoff + 1

    @staticmethod
    def from_scales(scales: DerivedScales, cutoff: int = 20) -> "DimensionlessConfig":
        return DimensionlessConfig(v0=scales.v0, h_x=scales.h_x, h_z=scales.h_z,
                                   cutoff=cutoff)


def operator_matrix(kind: str, cutoff: int) -> np.ndarray:
    """Dense matrix of a coupling operator in the |n> basis.

    Matrix elements (rows/columns ordered n = -N ... N):
      cos  theta:  <n|.|m> = (delta_{n,m+1} + delta_{n,m-1}) / 2
      sin  theta:  <n|.|m> = (delta_{n,m+1} - delta_{n,m-1}) / (2i)
      cos 2theta:  shift 2 analogue of cos theta
      sin 2theta:  shift 2 analogue of sin theta
      l_theta:     diag(n)
      shift_up:    e^{+i theta}, <n+1|.|n> = 1
      shift_down:  e^{-i theta}, adjoint of shift_up
    """
    if cutoff < 2:
        raise DomainError("cutoff must be at least 2")
    d = 2 * cutoff + 1
    if kind == "cos_theta":
        return 0.5 * (np.eye(d, k=-1) + np.eye(d, k=1)).astype(complex)
    if kind == "sin_theta":
        return (np.eye(d, k=-1) - np.eye(d, k=1)) / 2j
    if kind == "cos_2theta":
        return 0.5 * (np.eye(d, k=-2) + np.eye(d, k=2)).astype(complex)
    if kind == "sin_2theta":
        return (np.eye(d, k=-2) - np.eye(d, k=2)) / 2j
    if kind == "l_theta":
        return np.diag(np.arange(-cutoff, cutoff + 1)).astype(complex)
    if kind == "shift_up":
        return np.eye(d, k=-1).astype(complex)
    if kind == "shift_down":
        return np.eye(d, k=1).astype(complex)
    raise DomainError(f"unknown operator kind {kind!r}")


def build_hamiltonian(cfg: DimensionlessConfig) -> np.ndarray:
    """Dimensionless rotor Hamiltonian matrix for a configuration."""
    n = np.arange(-cfg.cutoff, cfg.cutoff + 1)
    h = np.diag((n.astype(float) ** 2 + cfg.v0 / 2.0)).astype(complex)
    h += (cfg.v0 / 4.0) * (np.eye(cfg.dim, k=-2) + np.eye(cfg.dim, k=2))
    if cfg.h_z != 0.0:
        h -= cfg.h_z * operator_matrix("cos_theta", cfg.cutoff)
    if cfg.h_x != 0.0:
        h -= cfg.h_x * operator_matrix("sin_theta", cfg.cutoff)
    return h


@dataclass
class Spectrum:
    """Diagonalized rotor: ascending eigenvalues (E_k units) and eigenvectors.

    ``vectors[:, m]`` holds |psi_m> in the |n> basis.  ``t_parity`` and
    ``r_parity`` hold +-1 labels under theta -> theta + pi and
    theta -> -theta, or 0 where the configuration breaks the symmetry;
    they stay None until assigned (see the symmetry module).
    """

    energies: np.ndarray
    vectors: np.ndarray
    config: DimensionlessConfig | None = None
    t_parity: np.ndarray | None = field(default=None)
    r_parity: np.ndarray | None = field(default=None)

    @property
    def dim(self) -> int:
        return self.energies.size

    def degenerate_clusters(self, tol: float = DEGENERACY_TOL):
        """Index ranges [start, stop) of eigenvalue clusters within tol."""
        clusters = []
        start = 0
        for i in range(1, self.dim + 1):
            if i == self.dim or self.energies[i] - self.energies[i - 1] > tol:
                clusters.append((start, i))
                start = i
        return clusters


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coefficient of each column real positive."""
    out = vectors.copy()
    for m in range(out.shape[1]):
        j = int(np.argmax(np.abs(out[:, m])))
        pivot = out[j, m]
        if pivot != 0.0:
            out[:, m] *= np.conj(pivot) / abs(pivot)
    return out


def diagonalize(h: np.ndarray, cfg: DimensionlessConfig | None = None,
                assign_parity: bool = True) -> Spectrum:
    """Solve the eigenproblem and return a validated :class:`Spectrum`.

    When a configuration is supplied and it leaves a symmetry intact,
    degenerate clusters are rotated into definite-parity combinations and
    parity labels are attached.
    """
    if not np.allclose(h, h.conj().T, atol=1e-12):
        raise DomainError("Hamiltonian must be Hermitian")
    energies, vectors = np.linalg.eigh(h)
    scale = max(np.max(np.abs(energies)), 1.0)
    residual = np.max(np.abs(h @ vectors - vectors * energies))
    if residual > _RESIDUAL_TOL * scale:
        raise NumericsError(
            f"eigensolver residual {residual:.3e} exceeds {_RESIDUAL_TOL * scale:.3e} "
            f"(dim={h.shape[0]}, max|e|={scale:.3e})")
    spec = Spectrum(energies=energies, vectors=_fix_phases(vectors), config=cfg)
    if cfg is not None and assign_parity:
        from .symmetry import assign_parities
        spec = assign_parities(spec, cfg)
    return spec


def solve(cfg: DimensionlessConfig, check_convergence: bool = False) -> Spectrum:
    """Build and diagonalize in one step.

    With ``check_convergence`` the lowest levels are compared against a
    doubled cutoff and a warning is emitted above 1e-8 drift.
    """
    spec = diagonalize(build_hamiltonian(cfg), cfg)
    if check_convergence:
        wide = DimensionlessConfig(cfg.v0, cfg.h_x, cfg.h_z, 2 * cfg.cutoff)
        ref = diagonalize(build_hamiltonian(wide), wide, assign_parity=False)
        m = min(6, spec.dim)
        drift = np.max(np.abs(spec.energies[:m] - ref.energies[:m]))
        if drift > 1e-8:
            warnings.warn(
                f"basis cutoff N={cfg.cutoff} not converged: lowest-level drift "
                f"{drift:.2e} against N={wide.cutoff}", stacklevel=2)
    return spec


def tunneling_observables(spec: Spectrum, scales: DerivedScales) -> dict:
    """Tunneling splitting in joules and tunneling frequency in hertz."""
    from .constants import H_PLANCK
    if spec.dim < 2:
        raise DomainError("spectrum must contain at least two levels")
    splitting = (spec.energies[1] - spec.energies[0]) * scales.kinetic_quantum_J
    return {"splitting_J": splitting, "frequency_Hz": splitting / H_PLANCK}


def tunneling_regime(cfg: DimensionlessConfig) -> dict:
    """Approximate lower barrier v0 - |h_z| and whether e_1 is below it.

    Only defined for h_x = 0; a parallel field biases the wells and the
    single-barrier criterion stops being meaningful, so callers must use
    the full visibility analysis there.
    """
    if cfg.h_x != 0.0:
        raise DomainError(
            "tunneling_regime is defined for h_x = 0 only; run the full "
            "visibility analysis for tilted double wells")
    spec = diagonalize(build_hamiltonian(cfg), cfg, assign_parity=False)
    barrier = cfg.v0 - abs(cfg.h_z)
    return {"barrier": barrier, "in_regime": bool(spec.energies[1] < barrier)}
