"""Discrete symmetries of the double well and the selection rules they impose.

Two operations matter: the half-turn T: theta -> theta + pi (the C2
symmetry of the barrier) and the reflection R: theta -> -theta.  On the
angular-momentum basis T is diagonal with entries (-1)^n and R permutes
n -> -n.  Eigenstates of a symmetric configuration carry parities t_m,
r_m = +-1, and a matrix element <psi_m|U|psi_n> of a coupling operator U
with signature (t_U, r_U) vanishes whenever t_U t_m t_n = -1 or
r_U r_m r_n = -1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NumericsError
from .rotor import DEGENERACY_TOL, DimensionlessConfig, Spectrum, operator_matrix

_PARITY_RESIDUAL_TOL = 1e-8

# (t_U, r_U) signatures of the coupling operators under T and R.
COUPLING_SIGNATURES = {
    "cos_theta": (-1, +1),
    "sin_theta": (-1, -1),
    "cos_2theta": (+1, +1),
    "sin_2theta": (+1, -1),
    "l_theta": (+1, -1),
}


@dataclass(frozen=True)
class CouplingSignature:
    kind: str
    t_u: int
    r_u: int


def coupling_signature(kind: str) -> CouplingSignature:
    if kind not in COUPLING_SIGNATURES:
        raise DomainError(f"no symmetry signature for operator kind {kind!r}")
    t_u, r_u = COUPLING_SIGNATURES[kind]
    return CouplingSignature(kind=kind, t_u=t_u, r_u=r_u)


def symmetry_operator(kind: str, cutoff: int) -> np.ndarray:
    """Matrix of T (theta -> theta + pi) or R (theta -> -theta) on the |n> basis."""
    d = 2 * cutoff + 1
    if kind == "T":
        n = np.arange(-cutoff, cutoff + 1)
        return np.diag((-1.0) ** (n % 2)).astype(complex)
    if kind == "R":
        return np.fliplr(np.eye(d)).astype(complex)
    raise DomainError(f"unknown symmetry kind {kind!r}, expected 'T' or 'R'")


def _applicable(cfg: DimensionlessConfig):
    t_ok = cfg.h_x == 0.0 and cfg.h_z == 0.0
    r_ok = cfg.h_x == 0.0
    return t_ok, r_ok


def _split_by_eigensign(block: np.ndarray, sym: np.ndarray):
    """Rotate a block of columns into eigenvectors of a +-1 symmetry.

    Returns the rotated block and the index ranges of the same-sign
    subspaces.  When the symmetry does not distinguish the states (all
    eigenvalues share one sign) the block is left untouched: rotating
    inside a degenerate symmetry eigenspace would scramble energies.
    """
    sym_block = block.conj().T @ sym @ block
    vals, rot = np.linalg.eigh(sym_block)
    if np.all(vals > 0.0) or np.all(vals < 0.0):
        return block, [(0, block.shape[1])]
    order = np.argsort(-vals)               # +1 subspace first
    rot = rot[:, order]
    vals = vals[order]
    split = int(np.count_nonzero(vals > 0.0))
    subspaces = [(lo, hi) for lo, hi in ((0, split), (split, block.shape[1])) if hi > lo]
    return block @ rot, subspaces


def assign_parities(spec: Spectrum, cfg: DimensionlessConfig) -> Spectrum:
    """Attach parity labels, rotating (near-)degenerate clusters as needed.

    Exact eigenstates of a symmetric configuration are parity-pure, but the
    dense solver mixes pairs whose gap approaches eps * ||H||.  Clusters
    below an adaptive tolerance are therefore rotated toward symmetry
    eigenvectors (which recovers the exact states whenever the symmetry
    distinguishes them), the Hamiltonian is re-diagonalized inside
    same-parity subspaces, and the cluster is re-sorted by energy.  Labels
    are None where the configuration breaks the symmetry.
    """
    t_ok, r_ok = _applicable(cfg)
    d = spec.dim
    vectors = spec.vectors.copy()
    t_labels = np.zeros(d, dtype=int)
    r_labels = np.zeros(d, dtype=int)
    if not (t_ok or r_ok):
        return replace(spec, vectors=vectors, t_parity=None, r_parity=None)

    from .rotor import build_hamiltonian, _fix_phases
    hmat = build_hamiltonian(cfg)
    scale = max(float(np.max(np.abs(spec.energies))), 1.0)
    # below this gap the solver's eigenvectors may be mixed beyond the
    # parity residual tolerance; rotation is safe and exact-izing there
    tol_sym = max(DEGENERACY_TOL, 3e-6 * scale)

    t_mat = symmetry_operator("T", cfg.cutoff) if t_ok else None
    r_mat = symmetry_operator("R", cfg.cutoff) if r_ok else None

    for start, stop in spec.degenerate_clusters(tol_sym):
        if stop - start == 1:
            continue
        block = vectors[:, start:stop]
        subspaces = [(0, stop - start)]
        for sym in (m for m, ok in ((t_mat, t_ok), (r_mat, r_ok)) if ok):
            refined = []
            for lo, hi in subspaces:
                if hi - lo == 1:
                    refined.append((lo, hi))
                    continue
                sub, parts = _split_by_eigensign(block[:, lo:hi], sym)
                block[:, lo:hi] = sub
                refined.extend((lo + a, lo + b) for a, b in parts)
            subspaces = refined
        # restore energy purity inside subspaces the symmetries cannot split
        for lo, hi in subspaces:
            if hi - lo > 1:
                sub = block[:, lo:hi]
                h_block = sub.conj().T @ hmat @ sub
                _, rot = np.linalg.eigh(h_block)
                block[:, lo:hi] = sub @ rot
        rayleigh = np.real(np.einsum("im,ij,jm->m", block.conj(), hmat, block))
        vectors[:, start:stop] = block[:, np.argsort(rayleigh)]

    vectors = _fix_phases(vectors)

    for m in range(d):
        v = vectors[:, m]
        for mat, labels, ok in ((t_mat, t_labels, t_ok), (r_mat, r_labels, r_ok)):
            if not ok:
                continue
            sv = mat @ v
            sign = 1 if np.real(np.vdot(v, sv)) >= 0.0 else -1
            residual = np.linalg.norm(sv - sign * v)
            if residual > _PARITY_RESIDUAL_TOL:
                raise NumericsError(
                    f"eigenstate {m} fails parity residual ({residual:.2e}) outside a "
                    "degenerate cluster; eigensolver convergence is suspect")
            labels[m] = sign

    return replace(spec, vectors=vectors,
                   t_parity=t_labels if t_ok else None,
                   r_parity=r_labels if r_ok else None)


def check_selection_rule(spec: Spectrum, sig: CouplingSignature, m: int, n: int) -> dict:
    """Predicted-zero flag from Eq.-(17)-style parity products, plus the actual value."""
    if spec.config is None:
        raise DomainError("spectrum must carry its configuration")
    op = operator_matrix(sig.kind, spec.config.cutoff)
    actual = abs(np.vdot(spec.vectors[:, m], op @ spec.vectors[:, n]))
    predicted = False
    if spec.t_parity is not None and spec.t_parity[m] != 0 and spec.t_parity[n] != 0:
        predicted |= sig.t_u * spec.t_parity[m] * spec.t_parity[n] == -1
    if spec.r_parity is not None and spec.r_parity[m] != 0 and spec.r_parity[n] != 0:
        predicted |= sig.r_u * spec.r_parity[m] * spec.r_parity[n] == -1
    return {"predicted_zero": bool(predicted), "actual": float(actual)}
