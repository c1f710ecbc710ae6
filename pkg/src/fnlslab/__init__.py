"""Pseudospectral lab for fractional NLS ground states on periodic boxes:
limit-problem solvers, penalized semiclassical runs, concentration and
sandwich diagnostics, and a self-contained verification suite.
"""

from .analysis import (AnalysisError, PoorFitWarning, cluster_solutions,
                       concentration_report, cupl_plus_one, decay_table,
                       fit_decay_exponent, sandwich_check, tail)
from .barycenter import (BarycenterConfig, BarycenterError, density,
                         phi_eps, psi_eps, smooth_cutoff, upsilon)
from .checks import CheckResult, run_suite
from .functionals import (EnergyBreakdown, FunctionalError, ProofParams,
                          energy_eps, energy_limit, energy_penalized, g_of,
                          grad_energy_eps, grad_energy_limit,
                          grad_energy_penalized, minimal_radius, penalty,
                          penalty_region, pohozaev, pohozaev_flagged,
                          read_params, write_params)
from .grid import (Field, FieldError, GridError, GridSpec, Region,
                   RegionError, annulus, ball, empty_region, region_where,
                   whole_box, zero_field)
from .io import (IOFormatError, read_field, read_json, read_region,
                 read_report, versions_manifest, write_field, write_json,
                 write_region, write_report)
from .model import (ConditionCheck, ModelError, ModelSpec, NonlinearitySpec,
                    PotentialSpec, ValidationReport, growth_bound_check,
                    make_double_well, make_ring_potential,
                    power_nonlinearity, read_model, sobolev_critical,
                    tabulated_nonlinearity, validate_nonlinearity,
                    validate_potential, write_model)
from .solvers import (SolutionDictionary, SolveFailure, SolveOptions,
                      SolveResult, SolverError, build_dictionary,
                      continuation, estimate_least_energy, fit_tail_radius,
                      gaussian_seed, mass_barycenter, multistart,
                      recenter_field, solve_ground_state, solve_penalized)
from .spectral import (SpectralError, dilate, dilate_czt, frac_laplacian,
                       gagliardo_sq, hs_norm, hs_norm_gagliardo,
                       hs_seminorm, inner, l2_norm, lp_norm,
                       mixed_gagliardo_sq, restricted_norm, translate,
                       translate_lattice, triple_norm)

__version__ = "0.1.0"
