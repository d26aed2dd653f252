"""Coupled free flow, transition zone and porous medium on a staggered grid.

Two models share one discretisation: the full model resolves the
transition zone with Brinkman equations, the reduced model collapses it
onto an interface carrying averaged unknowns.
"""
from .core import (ClosureProfile, PhysicalParams, ProfileKind, SymTensor2, ValidationError,
                   check_params, closure_params, validate_params, PROFILES)
from .grid import DofMap, GeometryConfig, Model, StaggeredGrid, build_grid, dof_count
from .boundary import (BC, BCKind, BoundarySpecFull, BoundarySpecReduced, GammaBoundarySpec,
                       GammaEnd, SourceFieldsFull, SourceFieldsReduced)
from .solver import LinearSystem, Method, SolveReport, SolverError, solve
from .assembly_full import assemble_full
from .assembly_reduced import ReducedCoefficients, assemble_reduced
from .verification import (ExactSolutionFull, ExactSolutionReduced, RunReport,
                           consistency_residuals, convergence_study, observed_orders)
from .scenarios import (DeviationReport, FiltrationConfig, average_full_across_transition,
                        extract_profile, filtration_bcs, relative_deviations, run_filtration)

__version__ = "0.1.0"
