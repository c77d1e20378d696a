"""Resource-competition dynamics: integration, stable distributions, analysis."""

from .errors import (
    AssumptionViolation,
    DimensionMismatch,
    DimensionTooLarge,
    FixedPointDiverged,
    Mu0Violation,
    NegativeInput,
    NewtonFailed,
    NotApplicable,
    NotConverged,
    ParseError,
    RclabError,
    StepRejected,
    UndefinedEntropy,
    UnknownKind,
    ValidationError,
)
from .esd import (
    EsdReport,
    EsdResult,
    brute_force_esd,
    check_K_nonsingular,
    kkt_residual,
    reconstruct_R,
    solve_esd,
    verify_esd,
)
from .integrator import (
    EntropyTrace,
    Scheme,
    StepConfig,
    Trajectory,
    entropy_trace,
    max_stable_dt,
    simulate,
    step_fully_implicit,
    step_semi_implicit,
)
from .model import (
    DerivedConstants,
    Diagnostics,
    H_gradient,
    H_hessian,
    H_value,
    ModelParams,
    State,
    compute_diagnostics,
    extinction_F,
    growth_rate,
    lyapunov_S,
    q_value,
    rhs,
    total_mass,
    validate_params,
)
from .scenarios import (
    ScenarioSpec,
    build_params,
    builtin_presets,
    load_scenario,
    save_scenario,
    trait_grid,
)
from .steady import (
    DiracSteadyState,
    Persistence,
    TwoPeakSteadyState,
    dirac_growth,
    dirac_steady_state,
    extinction_predicate,
    persistence_sum,
    positive_steady_state_excluded,
    two_peak_steady_state,
    two_peak_system,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
