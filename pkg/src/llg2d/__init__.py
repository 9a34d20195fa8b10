"""Length-preserving, energy-dissipative pseudo-spectral time integrators for
the Landau-Lifshitz(-Gilbert) equation on periodic 2D domains."""

from . import energy_fix as _energy_fix  # registers the energy schemes
from .adaptive import AdaptiveSettings, adapt_dt, adaptive_run
from .bdf import BDF_TABLES, BdfTable
from .energy_fix import SecantSettings, XiOutcome, apply_xi, energy_step, residual, secant_solve
from .errors import DegenerateFieldError, InstabilityError, SecantConvergenceError
from .fields import (
    RunRecord,
    VectorField,
    avg_linf_error,
    cross,
    dissipation,
    energy,
    grad_inf,
    grad_norm_sq,
    length_deviation,
    normalize_pointwise,
)
from .grid import Grid2D, build_grid, gradient, helmholtz_solve, laplacian
from .harness import ExperimentSpec, compare_study, convergence_study, reproduce, run_experiment, run_fixed
from .problems import (
    ManufacturedSolution,
    PROBLEMS,
    ic_benchmark,
    ic_smooth,
    ic_uniform,
    manufactured_forcing,
    seeded_manufactured_state,
)
from .reference import cached_reference, rk4_reference
from .schemes import (
    SchemeParams,
    SchemeState,
    corrector_bdf,
    gauss_seidel_predictor,
    generic_corrector,
    initial_state,
    predictor_bdf,
    scheme_ids,
    splitting_step,
    step,
)

__version__ = "0.1.0"
