"""Rotational quantum tunneling of a levitated nanomagnet.

Library layers: units (SI <-> dimensionless), rotor (spectra), symmetry
(parities and selection rules), dynamics (unitary evolution and
visibility), lindblad (GKLS open dynamics), channels (physical
decoherence rates), sweeps + cli (parameter scans and CSV emission).
"""

__version__ = "0.1.0"

from .errors import DomainError, NumericsError
from .units import PhysicalParams, DerivedScales, derive_scales, field_from_dimensionless
from .rotor import (DimensionlessConfig, Spectrum, operator_matrix, build_hamiltonian,
                    diagonalize, solve, tunneling_observables, tunneling_regime)
from .mathieu import mathieu_characteristic, field_free_level
from .symmetry import (CouplingSignature, coupling_signature, symmetry_operator,
                       assign_parities, check_selection_rule)
from .dynamics import (TimeSeries, gaussian_packet, doublet_state, evolve,
                       well_probability, well_kernel, visibility)
from .lindblad import (LindbladChannel, JumpOperator, DensityMatrix,
                       DissipativeTrajectory, bose_occupation, transition_rate,
                       zero_frequency_rate, build_jump_operators, gas_dissipator,
                       integrate_master_equation, steady_state_diagnostics)
from .channels import (GasParams, ElasticParams, SquidParams, RateReport,
                       roughness_to_b1, born_strength, gas_localization_rate,
                       eddy_particle_rate, eddy_plate_rate, phonon_angular_integrals,
                       acoustic_phonon_rate, seismic_rate, squid_backaction_rate,
                       decoherence_budget)
