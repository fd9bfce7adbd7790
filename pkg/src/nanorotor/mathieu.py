"""Independent oracle for the field-free rotor: Mathieu characteristic values.

The field-free stationary problem maps onto Mathieu's equation
y'' + (a - 2 q cos 2x) y = 0 with q = v0 / 4; its periodic solutions split
into four symmetry classes whose Fourier coefficients obey three-term
recurrences.  The characteristic values a_n(q) (even solutions ce_n) and
b_n(q) (odd solutions se_n) are eigenvalues of the symmetric tridiagonal
matrices of those recurrences.  They are computed here by Sturm-sequence
bisection on the characteristic determinant, deliberately NOT sharing any
code with the rotor Hamiltonian diagonalization so the two stay mutual
oracles.
"""

from __future__ import annotations

import math

from .errors import DomainError, NumericsError

_BISECT_TOL = 1e-13
_MAX_BISECT = 240


def _sturm_count(diag, off, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    count = 0
    qv = 1.0
    for i in range(len(diag)):
        coupling = 0.0 if i == 0 else off[i - 1] ** 2 / qv
        qv = diag[i] - x - coupling
        if qv == 0.0:
            qv = -1e-300
        if qv < 0.0:
            count += 1
    return count


def _tridiag_eigenvalue(diag, off, k):
    """k-th (ascending, 0-based) eigenvalue by Sturm bisection.

    Brackets come from the Gershgorin bound, widened defensively if the
    count test ever disagrees with them.
    """
    lo = min(
        d - (abs(off[i - 1]) if i else 0.0) - (abs(off[i]) if i < len(off) else 0.0)
        for i, d in enumerate(diag)
    )
    hi = max(
        d + (abs(off[i - 1]) if i else 0.0) + (abs(off[i]) if i < len(off) else 0.0)
        for i, d in enumerate(diag)
    )
    span = max(hi - lo, 1.0)
    for _ in range(8):
        if _sturm_count(diag, off, lo) == 0 and _sturm_count(diag, off, hi) == len(diag):
            break
        lo -= span
        hi += span
        span *= 2.0
    else:
        raise NumericsError("could not bracket Mathieu characteristic values")

    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if _sturm_count(diag, off, mid) <= k:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_TOL * max(1.0, abs(lo), abs(hi)):
            return 0.5 * (lo + hi)
    raise NumericsError("Mathieu bisection did not converge")


def _matrix_size(q, n):
    # Fourier coefficients decay superexponentially beyond index ~ sqrt(q);
    # generous margin keeps truncation error far below the bisection tolerance.
    return max(40, 3 * n + 20, int(4.0 * math.sqrt(q)) + 25)


def mathieu_characteristic(q: float, n: int, parity: str) -> float:
    """Characteristic value a_n(q) (parity="even") or b_n(q) (parity="odd").

    Valid for q >= 0 with n >= 0 for the even family and n >= 1 for the odd
    one, matching the index ranges of ce_n and se_n.
    """
    if q < 0.0:
        raise DomainError("q must be non-negative")
    size = _matrix_size(q, n)
    if parity == "even":
        if n < 0:
            raise DomainError("even-parity index n must be >= 0")
        if n % 2 == 0:
            # ce_{2k}: coefficients A_0, A_2, ...; symmetrized first coupling sqrt(2) q
            diag = [(2.0 * i) ** 2 for i in range(size)]
            off = [math.sqrt(2.0) * q] + [q] * (size - 2)
            return _tridiag_eigenvalue(diag, off, n // 2)
        # ce_{2k+1}: coefficients A_1, A_3, ...; corner term +q
        diag = [1.0 + q] + [(2.0 * i + 1.0) ** 2 for i in range(1, size)]
        off = [q] * (size - 1)
        return _tridiag_eigenvalue(diag, off, (n - 1) // 2)
    if parity == "odd":
        if n < 1:
            raise DomainError("odd-parity index n must be >= 1")
        if n % 2 == 0:
            # se_{2k}: coefficients B_2, B_4, ...
            diag = [(2.0 * i) ** 2 for i in range(1, size + 1)]
            off = [q] * (size - 1)
            return _tridiag_eigenvalue(diag, off, n // 2 - 1)
        # se_{2k+1}: coefficients B_1, B_3, ...; corner term -q
        diag = [1.0 - q] + [(2.0 * i + 1.0) ** 2 for i in range(1, size)]
        off = [q] * (size - 1)
        return _tridiag_eigenvalue(diag, off, (n - 1) // 2)
    raise DomainError(f"unknown parity {parity!r}, expected 'even' or 'odd'")


def field_free_level(v0: float, m: int) -> float:
    """Dimensionless eigenvalue e_m of the field-free rotor from the oracle.

    The sorted spectrum interleaves the two families: even levels are
    a_{m/2}(q) and odd levels b_{(m+1)/2}(q), shifted by the constant
    potential offset v0 / 2, with q = v0 / 4.
    """
    if m < 0:
        raise DomainError("level index must be >= 0")
    q = v0 / 4.0
    if m % 2 == 0:
        char = mathieu_characteristic(q, m // 2, "even")
    else:
        char = mathieu_characteristic(q, (m + 1) // 2, "odd")
    return char + v0 / 2.0
