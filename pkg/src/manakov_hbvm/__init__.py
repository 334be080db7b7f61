"""Structure-preserving space-time solver for Manakov systems.

Fourier-Galerkin truncation in space, HBVM(k, s) Runge-Kutta methods in
time, and a blended iteration for the implicit stage equations.
"""

from .exceptions import ConfigurationError, SolverError
from .fourier_space import (
    DiffMatrices,
    FourierBasis,
    build_basis,
    build_diff,
    project,
    quadrature,
    synthesize,
)
from .hbvm_tableau import HbvmTableau, build_tableau, butcher_A, gauss_legendre
from .integrator import (
    IntegrationConfig,
    Trajectory,
    convergence_study,
    integrate,
    reference_trajectory,
    spectral_time_run,
    symmetry_probe,
)
from .manakov_system import (
    InvariantRecord,
    ManakovProblem,
    hamiltonian,
    initial_state,
    invariants,
    rhs,
    solution_error,
)
from .problems import problem_manakov1, problem_manakov2
from .stage_solver import (
    SolverReport,
    ThetaOperator,
    advance,
    apply_theta,
    blended_solve,
    build_theta,
    fixed_point_solve,
    hsmall_bound,
    stage_residual,
)

__version__ = "0.1.0"
