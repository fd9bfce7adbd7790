"""Physical and mathematical constants used across the package.

CODATA 2018 values. Rate formulas downstream are sensitive to constant
precision, so everything is kept to at least 10 significant digits and
defined in exactly one place.
"""

# SI defining / CODATA 2018 constants
HBAR = 1.054571817e-34          # J s (h / 2 pi, derived from exact h)
H_PLANCK = 6.62607015e-34       # J s (exact)
K_B = 1.380649e-23              # J / K (exact)
MU_0 = 1.25663706212e-6         # N / A^2
ATOMIC_MASS = 1.66053906660e-27  # kg
FLUX_QUANTUM = 2.067833848e-15  # Wb (h / 2e)

# Riemann zeta values entering the image-dipole trap formulas.
# Hard-coded literals, no series evaluation needed for two numbers.
ZETA_3 = 1.2020569031595943
ZETA_5 = 1.0369277551433699

# Geometry constant of the z^2 trap curvature: 93 zeta(5) / (4 zeta(3))
CURVATURE_K = 93.0 * ZETA_5 / (4.0 * ZETA_3)
