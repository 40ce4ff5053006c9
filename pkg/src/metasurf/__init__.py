"""Plane-wave scattering by a periodic line of dipolar resonators.

Lattice sums, the multiple-scattering solve, Rayleigh orders and the
effective impedance/transfer description of the resulting metasurface.
"""

from .accel import AccelSpec, SeriesResult, wynn_epsilon
from .errors import (ConvergenceFailure, DegenerateJump, DomainError, LatticePointError,
                     LatticeResonance, MetasurfError, RegimeError, RegimeWarning, WoodAnomaly)
from .grating import (OrderTable, direct_field, energy_balance, field_eval, order_table,
                      rt_coefficients, rt_tail_limit)
from .lattice import (GratingConfig, LatticeSums, greens_spatial, greens_spectral, lattice_sums,
                      sigma_matrix, sigma_p_asymptotic, sigma_p_direct)
from .pipeline import Solution, solve
from .scatter import (DipoleMoments, ScatteringMatrix, dipole, incident_coeffs, monopole,
                      solve_moments)
from .specfun import bessel_j, bessel_y, beta_branch, hankel1
from .surface import (BlockOperator2x2, DiagonalOperator, TraceVector, admittance_Y,
                      calderon_projectors, homogenized_transfer, impedance_Z, jump_operators,
                      sobolev_norm, surface_traces, transfer_apply, transfer_operator)

__version__ = "0.1.0"
