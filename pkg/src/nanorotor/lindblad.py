"""GKLS machinery: thermal rates, jump operators, master-equation integration.

Secular jump operators are built in the energy eigenbasis by grouping the
matrix elements of a coupling operator by Bohr frequency; each group is an
eigenoperator of the Hamiltonian, [H, S(w)] = -hbar w S(w), and enters the
dissipator scaled by sqrt(gamma(w)).  The gas-scattering localization
channel is the exception: its shift operators e^{+-i theta} are kept whole,
with no rotating-wave decomposition.

The integrator is a fixed-step classical 4th-order scheme on the vectorized
density matrix.  The generator is linear and time independent, so the RK4
update over one step h is the constant matrix

    M = 1 + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24,

which is applied between output times by binary powering; this is the same
map as stepping sequentially, evaluated without the per-step Python cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR, K_B
from .dynamics import TimeSeries, well_kernel
from .errors import DomainError, NumericsError
from .rotor import Spectrum, operator_matrix

BOHR_TOL = 1e-7        # default Bohr-frequency grouping tolerance, E_k/hbar units
_POSITIVITY_TOL = 1e-8
_HERMITICITY_TOL = 1e-9
_TRACE_TOL = 1e-8

SPECTRAL_TYPES = ("flat", "ohmic", "super_ohmic")


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean Bose occupation n(omega) at angular frequency omega (rad/s)."""
    if omega <= 0.0:
        raise DomainError("bose_occupation requires omega > 0; pass |omega|")
    if temperature < 0.0:
        raise DomainError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class LindbladChannel:
    """One environmental coupling: operator kind, strength, bath temperature.

    ``spectral`` selects how rates extrapolate across Bohr frequencies:
    "flat" uses the effective constant gamma(w) = Gamma (n+1 | n) as is,
    "ohmic" and "super_ohmic" reweight by (|w|/w_ref)^1 or ^3 and change the
    zero-frequency rule.  ``omega_ref_per_s`` anchors that reweighting; when
    unset it defaults to the tunneling frequency of the spectrum at hand.
    """

    kind: str
    rate_per_s: float
    temperature_K: float
    spectral: str = "flat"
    omega_ref_per_s: float | None = None

    def __post_init__(self):
        if self.rate_per_s < 0.0:
            raise DomainError("rate_per_s must be non-negative")
        if self.temperature_K < 0.0:
            raise DomainError("temperature_K must be non-negative")
        if self.spectral not in SPECTRAL_TYPES:
            raise DomainError(f"spectral must be one of {SPECTRAL_TYPES}")


def _reweight(ch: LindbladChannel, omega: float) -> float:
    if ch.spectral == "flat":
        return 1.0
    if ch.omega_ref_per_s is None or ch.omega_ref_per_s <= 0.0:
        raise DomainError("ohmic/super_ohmic channels need omega_ref_per_s > 0")
    power = 1 if ch.spectral == "ohmic" else 3
    return (abs(omega) / ch.omega_ref_per_s) ** power

def transition_rate(ch: LindbladChannel, omega: float) -> float:
    """gamma(omega) in 1/s for a finite Bohr frequency omega (rad/s).

    Emission (omega > 0) carries n+1, absorption (omega < 0) carries n.
    """
    if omega == 0.0:
        raise DomainError("omega = 0 is handled by zero_frequency_rate")
    n = bose_occupation(abs(omega), ch.temperature_K)
    base = ch.rate_per_s * ((n + 1.0) if omega > 0.0 else n)
    return base * _reweight(ch, omega)


def zero_frequency_rate(ch: LindbladChannel) -> float:
    """Rate of the omega = 0 (pure dephasing) component.

    Super-Ohmic baths have J n -> 0 at zero frequency, so no dephasing even
    at finite temperature.  Ohmic baths give the temperature-linear limit
    folded as Gamma 2 k_B T / (hbar w_ref); the flat-effective convention
    uses the two-sided limit Gamma (2 n(w_ref) + 1).
    """
    if ch.spectral == "super_ohmic":
        return 0.0
    if ch.omega_ref_per_s is None or ch.omega_ref_per_s <= 0.0:
        raise DomainError("zero_frequency_rate needs omega_ref_per_s > 0")
    if ch.spectral == "ohmic":
        return ch.rate_per_s * 2.0 * K_B * ch.temperature_K / (HBAR * ch.omega_ref_per_s)
    n = bose_occupation(ch.omega_ref_per_s, ch.temperature_K)
    return ch.rate_per_s * (2.0 * n + 1.0)


@dataclass
class JumpOperator:
    """One Lindblad collapse operator.

    ``matrix`` already carries the sqrt(gamma) scaling and is in physical
    normalization, units s^{-1/2}.  ``omega`` is the dimensionless Bohr
    frequency (E_k/hbar units) of a secular operator, or None for the
    non-secular gas shift operators.  ``basis`` is "energy" or "angular".
    """

    matrix: np.ndarray
    gamma_per_s: float
    omega: float | None = None
    basis: str = "energy"
    kind: str = ""


def _cluster_frequencies(values: np.ndarray, tol: float):
    """Greedy 1D clustering of sorted frequencies with gap threshold tol."""
    order = np.argsort(values)
    clusters = []
    start = 0
    sorted_vals = values[order]
    for i in range(1, order.size + 1):
        if i == order.size or sorted_vals[i] - sorted_vals[i - 1] > tol:
            members = order[start:i]
            diameter = sorted_vals[i - 1] - sorted_vals[start]
            if diameter > 10.0 * tol:
                raise NumericsError(
                    f"Bohr-frequency cluster spans {diameter:.3e} (> 10 x tol "
                    f"{tol:.1e}) through chaining; use a smaller omega tolerance")
            clusters.append(members)
            start = i
    return clusters


def build_jump_operators(spec: Spectrum, ch: LindbladChannel, rate_scale_per_s: float,
                         omega_tol: float = BOHR_TOL,
                         verify_symmetry: bool = True) -> list[JumpOperator]:
    """Secular jump operators of a thermal channel in the energy eigenbasis.

    Matrix elements of the coupling operator are grouped by dimensionless
    Bohr frequency within ``omega_tol``; each group becomes one operator
    scaled by sqrt(gamma).  The w = 0 group (diagonal plus degenerate
    pairs) uses the zero-frequency rule.
    """
    if ch.rate_per_s == 0.0:
        return []
    if ch.omega_ref_per_s is None:
        gap = (spec.energies[1] - spec.energies[0]) * rate_scale_per_s
        ch = LindbladChannel(ch.kind, ch.rate_per_s, ch.temperature_K, ch.spectral,
                             omega_ref_per_s=gap if gap > 0.0 else None)

    s_op = operator_matrix(ch.kind, spec.config.cutoff)
    s_energy = spec.vectors.conj().T @ s_op @ spec.vectors

    if verify_symmetry:
        _warn_broken_selection_rules(spec, ch.kind, s_energy)

    d = spec.dim
    # entry (m, n) has eigenfrequency w = e_n - e_m: [H, |m><n|] = -(e_n - e_m)|m><n|
    omega_mat = spec.energies[None, :] - spec.energies[:, None]
    flat = omega_mat.ravel()
    entry_cut = 1e-14 * max(1.0, float(np.max(np.abs(s_energy))))

    ops = []
    for members in _cluster_frequencies(flat, omega_tol):
        rows, cols = np.unravel_index(members, (d, d))
        values = s_energy[rows, cols]
        if np.max(np.abs(values)) <= entry_cut:
            continue
        omega_c = float(np.mean(omega_mat[rows, cols]))
        if abs(omega_c) <= omega_tol:
            omega_c = 0.0
            gamma = zero_frequency_rate(ch)
        else:
            gamma = transition_rate(ch, omega_c * rate_scale_per_s)
        if gamma == 0.0:
            continue
        mat = np.zeros((d, d), dtype=complex)
        mat[rows, cols] = values * math.sqrt(gamma)
        ops.append(JumpOperator(matrix=mat, gamma_per_s=gamma, omega=omega_c,
                                basis="energy", kind=ch.kind))
    return ops


def _warn_broken_selection_rules(spec: Spectrum, kind: str, s_energy: np.ndarray):
    """Diagnostic: symmetry-forbidden matrix elements must be numerically zero."""
    from .symmetry import COUPLING_SIGNATURES
    if kind not in COUPLING_SIGNATURES:
        return
    t_u, r_u = COUPLING_SIGNATURES[kind]
    worst = 0.0
    for labels, sign_u in ((spec.t_parity, t_u), (spec.r_parity, r_u)):
        if labels is None:
            continue
        defined = labels != 0
        product = sign_u * np.outer(labels, labels)
        forbidden = defined[:, None] & defined[None, :] & (product == -1)
        if np.any(forbidden):
            worst = max(worst, float(np.max(np.abs(s_energy[forbidden]))))
    if worst > 1e-10:
        warnings.warn(
            f"selection rule violated for {kind}: forbidden matrix element of "
            f"magnitude {worst:.2e}; symmetry of the spectrum is suspect",
            stacklevel=3)


def gas_dissipator(lambda_r_per_s: float, cutoff: int) -> list[JumpOperator]:
    """Pure-localization channel: L_+- = sqrt(Lambda_R / 4) e^{+-i theta}.

    The full shift operators are kept as jump operators (no rotating-wave
    decomposition); the pair is symmetric under theta -> -theta.
    """
    if lambda_r_per_s < 0.0:
        raise DomainError("lambda_r_per_s must be non-negative")
    if lambda_r_per_s == 0.0:
        return []
    amp = math.sqrt(lambda_r_per_s / 4.0)
    return [
        JumpOperator(matrix=amp * operator_matrix("shift_up", cutoff),
                     gamma_per_s=lambda_r_per_s / 4.0, omega=None, basis="angular",
                     kind="gas_shift_up"),
        JumpOperator(matrix=amp * operator_matrix("shift_down", cutoff),
                     gamma_per_s=lambda_r_per_s / 4.0, omega=None, basis="angular",
                     kind="gas_shift_down"),
    ]


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state over the truncated basis."""

    matrix: np.ndarray
    basis: str = "energy"

    def __post_init__(self):
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise DomainError("density matrix must be Hermitian to 1e-10")
        if abs(np.trace(m).real - 1.0) > _TRACE_TOL:
            raise DomainError("density matrix trace must equal 1 within 1e-8")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)) < -_POSITIVITY_TOL:
            raise DomainError("density matrix must be positive semidefinite")
        if self.basis not in ("energy", "angular"):
            raise DomainError("basis must be 'energy' or 'angular'")

    @staticmethod
    def from_state(coeffs: np.ndarray, basis: str = "angular") -> "DensityMatrix":
        return DensityMatrix(matrix=np.outer(coeffs, coeffs.conj()), basis=basis)


@dataclass
class DissipativeTrajectory:
    """Output of the master-equation integrator."""

    series: TimeSeries
    purity: np.ndarray
    trace_error: np.ndarray
    hermiticity_drift: np.ndarray
    min_eigenvalue: np.ndarray
    step: float = 0.0
    states: np.ndarray | None = field(default=None, repr=False)


def _rk4_step_matrix(a: np.ndarray) -> np.ndarray:
    """One-step RK4 update matrix for the linear system rho' = A rho."""
    eye = np.eye(a.shape[0], dtype=complex)
    a2 = a @ a
    a3 = a2 @ a
    a4 = a2 @ a2
    return eye + a + a2 / 2.0 + a3 / 6.0 + a4 / 24.0


def build_liouvillian(spec: Spectrum, jumps: list[JumpOperator],
                      rate_scale_per_s: float) -> np.ndarray:
    """Dense GKLS generator on the row-major vectorized density matrix.

    Works in the energy eigenbasis and in dimensionless time, so physical
    jump operators (units s^{-1/2}) are rescaled by 1/sqrt(rate scale).
    """
    d = spec.dim
    dim2 = d * d
    energies = spec.energies
    # unitary part: vec(rho)_{mn} picks up -i (e_m - e_n)
    delta = energies[:, None] - energies[None, :]
    gen = np.diag((-1j * delta).ravel())

    k_sum = np.zeros((d, d), dtype=complex)
    for jump in jumps:
        mat = jump.matrix / math.sqrt(rate_scale_per_s)
        if jump.basis == "angular":
            mat = spec.vectors.conj().T @ mat @ spec.vectors
        elif jump.basis != "energy":
            raise DomainError(f"unknown jump-operator basis {jump.basis!r}")
        k_sum += mat.conj().T @ mat
        rows, cols = np.nonzero(np.abs(mat) > 0.0)
        if rows.size > d:
            gen += np.kron(mat, mat.conj())
        else:
            vals = mat[rows, cols]
            sup_rows = (rows[:, None] * d + rows[None, :]).ravel()
            sup_cols = (cols[:, None] * d + cols[None, :]).ravel()
            weights = (vals[:, None] * vals.conj()[None, :]).ravel()
            np.add.at(gen, (sup_rows, sup_cols), weights)
    eye = np.eye(d, dtype=complex)
    gen -= 0.5 * (np.kron(k_sum, eye) + np.kron(eye, k_sum.T))
    assert gen.shape == (dim2, dim2)
    return gen


def integrate_master_equation(rho0: DensityMatrix, spec: Spectrum,
                              jumps: list[JumpOperator], times: np.ndarray,
                              rate_scale_per_s: float, step_safety: float = 50.0,
                              keep_states: bool = False) -> DissipativeTrajectory:
    """Fixed-step 4th-order integration of the GKLS equation.

    The step obeys h <= 1 / (safety * max(spectral spread, total rate)) in
    dimensionless time; output samples land exactly on the requested times.
    Trace, Hermiticity and positivity are tracked and enforced.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0.0) or times[0] < 0.0:
        raise DomainError("times must be a non-empty increasing array of t >= 0")

    d = spec.dim
    rho = rho0.matrix.astype(complex)
    if rho0.basis == "angular":
        rho = spec.vectors.conj().T @ rho @ spec.vectors

    spread = float(spec.energies[-1] - spec.energies[0])
    total_rate = sum(
        float(np.sum(np.abs(j.matrix) ** 2)) / rate_scale_per_s for j in jumps)
    h_max = 1.0 / (step_safety * max(spread, total_rate, 1.0))

    gen = build_liouvillian(spec, jumps, rate_scale_per_s) if jumps else None

    w_energy = spec.vectors.conj().T @ well_kernel(spec.config.cutoff) @ spec.vectors

    n_out = times.size
    p_plus = np.empty(n_out)
    purity = np.empty(n_out)
    trace_err = np.empty(n_out)
    herm = np.empty(n_out)
    min_eig = np.empty(n_out)
    states = np.empty((n_out, d, d), dtype=complex) if keep_states else None

    def record(i, mat):
        tr = np.trace(mat).real
        trace_err[i] = abs(tr - 1.0)
        herm[i] = float(np.max(np.abs(mat - mat.conj().T)))
        sym = (mat + mat.conj().T) / 2.0
        eigs = np.linalg.eigvalsh(sym)
        min_eig[i] = float(eigs[0])
        if min_eig[i] < -_POSITIVITY_TOL:
            raise NumericsError(
                f"density matrix lost positivity (min eigenvalue {min_eig[i]:.2e}); "
                "reduce the integration step")
        p_plus[i] = float(np.real(np.trace(mat @ w_energy)))
        purity[i] = float(np.real(np.trace(mat @ mat)))
        if keep_states:
            states[i] = mat

    # segment lengths, including the lead-in from t = 0 to times[0]
    gaps = np.diff(np.concatenate(([0.0], times)))
    seg_cache: dict[float, tuple] = {}
    vec = rho.ravel().copy()
    step_used = h_max

    if gen is None:
        # closed system: generator is diagonal, RK4 polynomial applied elementwise
        delta = (spec.energies[:, None] - spec.energies[None, :]).ravel()
        for i, gap in enumerate(gaps):
            if gap > 0.0:
                n_sub = max(1, math.ceil(gap / h_max))
                z = -1j * delta * (gap / n_sub)
                m_diag = 1.0 + z + z**2 / 2.0 + z**3 / 6.0 + z**4 / 24.0
                vec = vec * m_diag**n_sub
                step_used = min(step_used, gap / n_sub)
            record(i, vec.reshape(d, d))
    else:
        gap_prop: dict[tuple, np.ndarray] = {}
        for i, gap in enumerate(gaps):
            if gap > 0.0:
                # power-of-two substep count: the whole-gap propagator is then
                # pure squarings of the one-step matrix
                n_sub = 1 << max(0, math.ceil(math.log2(gap / h_max)))
                h = gap / n_sub
                key = (round(h, 15), n_sub)
                if key not in gap_prop:
                    if key[0] not in seg_cache:
                        seg_cache[key[0]] = {0: _rk4_step_matrix(gen * h)}
                    if len(gap_prop) < 8:
                        # precompose the whole-gap propagator; one matvec per output
                        eye = np.eye(vec.size, dtype=complex)
                        gap_prop[key] = _apply_power(seg_cache[key[0]], n_sub, eye)
                if key in gap_prop:
                    vec = gap_prop[key] @ vec
                else:
                    vec = _apply_power(seg_cache[key[0]], n_sub, vec)
                step_used = min(step_used, h)
            record(i, vec.reshape(d, d))

    series = TimeSeries(times=times, p_plus=p_plus, dimensionless=True)
    return DissipativeTrajectory(series=series, purity=purity, trace_error=trace_err,
                                 hermiticity_drift=herm, min_eigenvalue=min_eig,
                                 step=step_used, states=states)


def _apply_power(cache: dict, n: int, vec: np.ndarray) -> np.ndarray:
    """vec <- M^n vec with cached binary powers cache[j] = M^(2^j)."""
    out = vec
    bit = 0
    while n:
        if bit not in cache:
            cache[bit] = cache[bit - 1] @ cache[bit - 1]
        if n & 1:
            out = cache[bit] @ out
        n >>= 1
        bit += 1
    return out


def steady_state_diagnostics(traj: DissipativeTrajectory) -> dict:
    """Asymptote and relaxation time from the tail of a p_+(t) trajectory.

    The last quartile must have settled (drift below 1e-3) for a fit; the
    relaxation time comes from a log-linear fit to the envelope peaks of
    |p_+ - p_inf|.
    """
    t = traj.series.times
    p = traj.series.p_plus
    quartile = slice(3 * t.size // 4, None)
    p_inf = float(np.mean(p[quartile]))
    drift = float(np.max(p[quartile]) - np.min(p[quartile]))
    if drift >= 1e-3:
        return {"p_infinity": p_inf, "relaxation_time": None, "converged": False,
                "tail_drift": drift}

    residual = np.abs(p - p_inf)
    peaks = [i for i in range(1, t.size - 1)
             if residual[i] >= residual[i - 1] and residual[i] > residual[i + 1]
             and residual[i] > 1e-12]
    if len(peaks) < 3:
        # overdamped: fit the residual decay directly where it is resolvable
        mask = residual > max(1e-12, 1e-6 * residual.max())
        if np.count_nonzero(mask) < 4 or residual.max() < 1e-9:
            return {"p_infinity": p_inf, "relaxation_time": None, "converged": True,
                    "tail_drift": drift}
        coeff = np.polyfit(t[mask], np.log(residual[mask]), 1)
    else:
        idx = np.asarray(peaks)
        coeff = np.polyfit(t[idx], np.log(residual[idx]), 1)
    slope = coeff[0]
    tau = -1.0 / slope if slope < 0.0 else None
    return {"p_infinity": p_inf, "relaxation_time": tau,
            "converged": True, "tail_drift": drift}
