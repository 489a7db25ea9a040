"""chemotaxis_lab: numerical laboratory for attraction-repulsion chemotaxis
systems with logistic damping.

Subpackages:
    regimes      parameter regimes, assumptions, derived exponents
    grid/solver  radial finite-volume integration (full and reduced forms)
    functionals  mass accumulation, moment functionals, tracked constants
    bounds       blow-up time lower bounds (Osgood integral and explicit form)
    scenarios    blow-up experiment construction and verification
    cli          command-line interface (classify / bound / simulate / blowup / sweep)
"""

from .errors import (
    ChemotaxisLabError,
    ConfigError,
    DivergenceError,
    DtUnderflow,
    ExponentInequalityViolation,
    FitError,
    InfeasibleSpec,
    InsufficientSamples,
    InvalidParameter,
    ModelError,
    ObserverError,
    QuadratureError,
    RegimeError,
    SearchExhausted,
    SingularQuadratureError,
    StepRejected,
    VerdictFailure,
)
from .bounds import (
    BoundReport,
    OdiCoefficients,
    bound_report,
    explicit_bound,
    fit_odi_coefficients,
    osgood_integral,
)
from .functionals import (
    FunctionalObserver,
    FunctionalSeries,
    MassAccumulation,
    MomentConfig,
    admissible_gamma_interval,
    c0_constant,
    concavity_check,
    in_S_phi,
    mass_accumulation,
    moment_phi,
    moment_psi,
    production_means,
    signal_mean_gap,
    sphi_threshold,
)
from .grid import RadialGrid
from .regimes import (
    ExponentSet,
    ModelParams,
    PowerLawProduction,
    ProductionLaw,
    RegimeReport,
    TabulatedProduction,
    admissible_value,
    check_assumptions,
    compare_with_linear_sensitivity,
    compute_exponents,
    compute_pbar,
    compute_pbar_detail,
    compute_pfrak,
    validate_params,
)
from .scenarios import (
    ExperimentConfig,
    ExperimentReport,
    InitialDataSpec,
    build_concentrated_u0,
    critical_mass,
    run_blowup_experiment,
    select_eps_sstar,
    select_s0,
    verify_superlinear_odi,
    verify_lp_growth,
)
from .solver import (
    RadialState,
    RunResult,
    StepperConfig,
    StepResult,
    advance,
    elliptic_solve_radial,
    extrapolate_Tmax,
    make_state,
    reduced_gradient,
    run,
)

__version__ = "0.1.0"
