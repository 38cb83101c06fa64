"""Radial and one-dimensional eigenpairs of fully nonlinear elliptic operators."""
__version__ = "0.1.0"

from .errors import AssemblyError, BracketError, DomainError, IntegrationError, SolverError
from .operators import (EvalPoint, OperatorSpec, bellman, check_structure, dump_operator,
                        evaluate, flip, invert_m, invert_origin, linear, load_operator,
                        pucci_minus, pucci_plus)
from .ivp import IvpConfig, Source, Trajectory, first_zero, integrate
from .bvp import BvpProblem, choose_kappa, solve_dirichlet, solve_neumann_dirichlet
from .diagnostics import AbpReport, abp_check, abp_constant, blowup_check
from .semi_eigen import (SemiEigenResult, inverse_iteration, monotonicity_table, semi_eigenvalue,
                         shoot_lambda)
from .nehari import (EigenPair, NodeVector, assemble, completeness_probe, solve_nodes, spectrum,
                     v_map)
from .radial import (RadialProblem, RadialSolveReport, radial_dirichlet,
                     radial_integrate_from_origin, radial_semi_eigenvalue, radial_solve_mixed_eps,
                     radial_spectrum)
