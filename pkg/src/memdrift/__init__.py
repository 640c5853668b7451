"""Scaled 1D drift-diffusion simulator for oxide memristors.

Implements the three-species transient model (electrons, holes, oxygen
vacancies) and its fast-relaxation reduction on a Scharfetter-Gummel
finite-volume grid in quasi-Fermi variables, with free-energy diagnostics
and reproducible experiment runners.
"""

from .analysis import (T_k, conjugate_g_xi, g_k, h_k, verify_conjugate_bound,
                       verify_truncation_lemmas)
from .assembly import (FULL, REDUCED, State, StepContext, jacobian, residual,
                       residual_full, residual_reduced)
from .device import (BiasProgram, BoundaryData, DeviceConfig, Grid,
                     ScalingBlock, build_uniform_grid, built_in_potential,
                     constant_profile, initial_potential, piecewise_profile,
                     scaled_debye_length)
from .diagnostics import (DiagnosticsRecord, entropy_production_D,
                          free_energy_full, free_energy_reduced,
                          l1_trajectory_distance, mass_D,
                          relative_free_energy, terminal_current)
from .numerics import (BlockTridiagonalSystem, NewtonOptions, NewtonResult,
                       bernoulli, factor_solve_block_tridiagonal, newton_solve,
                       sg_flux_n, sg_flux_pD)
from .solver import (TimeGrid, Trajectory, initial_state, run,
                     solve_stationary, step)

__version__ = "0.1.0"
