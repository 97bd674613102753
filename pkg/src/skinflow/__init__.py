"""Dynamical-systems toolkit for a saturating nonreciprocal phase flow.

The planar flow

    psi' = v,    v' = 2 F(psi^2) v - 2 E psi,    F(z) = gamma + a z - b z^2

describes stationary half-line profiles whose trajectories either collapse
to the origin (skin modes) or settle on a limit cycle (extended states).
The package covers the full analysis chain: closed-form averaged theory,
event-located integration, shot classification, return-map continuation
with fold refinement, basin geometry under a slope measure, quasi-static
hysteresis sweeps, and a CLI that emits reproducible datasets with figures.
"""
from .basin import (
    BasinPoint,
    SlopeDensity,
    basin_point,
    basin_scan,
    jump_at_fold,
    numeric_fold,
    p_skin_cauchy,
    p_skin_numeric,
    separatrix_threshold,
    theory_bracket,
)
from .classify import (
    ClassifierConfig,
    ShotResult,
    asymptotic_amplitude,
    classify,
    fractal_dimension,
    ipr,
    shoot,
    turning_amplitude_spread,
)
from .config import RunConfig, load_config, parse_config, to_text
from .cycles import (
    Branch,
    LimitCycle,
    amplitude_from_section,
    continue_branch,
    cycle_amplitude,
    find_cycle,
    locate_fold,
    return_map,
)
from .errors import (
    BracketInvalid,
    ConfigError,
    DegenerateTrajectory,
    InsufficientEvents,
    MaxLengthExceeded,
    NoConvergence,
    NoFoldInBranch,
    NoReturn,
    NumericalError,
    OutOfSpan,
    QuadratureFailure,
    SkinflowError,
    StepSizeUnderflow,
    StepUnderflow,
    UndecidedAtMidpoint,
    UnknownFigure,
)
from .integrate import (
    EventSpec,
    IntegratorConfig,
    Trajectory,
    TrajectoryEvent,
    evaluate_dense,
    integrate,
    lyapunov_below,
    section_crossing,
    turning_point,
)
from .model import (
    ModelParams,
    OriginSpectrum,
    PhaseState,
    flow_rhs,
    lienard_primitive,
    lyapunov_rate,
    lyapunov_value,
    nonreciprocity,
    origin_eigenvalues,
    origin_jacobian,
)
from .report import (
    FIGURES,
    Dataset,
    build_basin,
    build_bifurcation,
    build_predict,
    build_reproduce,
    build_sweep,
    build_trajectory,
    to_csv,
    to_json,
    write_dataset,
)
from .sweep import (
    SweepRecord,
    SweepResult,
    default_skin_threshold,
    quasi_static_sweep,
)
from .theory import (
    TheoryPrediction,
    avg_drift,
    avg_drift_derivative,
    branch_amplitudes,
    exact_phase_rhs,
    exact_radial_rhs,
    fold_amplitude,
    gamma_c_theory,
    hopf_amplitude_scaling,
    slow_amplitude_validity,
)

__version__ = "1.0.0"

__all__ = [
    "ModelParams", "PhaseState", "OriginSpectrum",
    "flow_rhs", "nonreciprocity", "origin_jacobian", "origin_eigenvalues",
    "lyapunov_value", "lyapunov_rate", "lienard_primitive",
    "IntegratorConfig", "EventSpec", "Trajectory", "TrajectoryEvent",
    "integrate", "evaluate_dense",
    "section_crossing", "turning_point", "lyapunov_below",
    "ClassifierConfig", "ShotResult", "shoot", "ipr", "fractal_dimension",
    "classify", "asymptotic_amplitude", "turning_amplitude_spread",
    "LimitCycle", "Branch", "return_map", "find_cycle", "continue_branch",
    "locate_fold", "cycle_amplitude", "amplitude_from_section",
    "TheoryPrediction", "avg_drift", "avg_drift_derivative",
    "branch_amplitudes", "gamma_c_theory", "fold_amplitude",
    "hopf_amplitude_scaling", "slow_amplitude_validity",
    "exact_radial_rhs", "exact_phase_rhs",
    "SlopeDensity", "BasinPoint", "separatrix_threshold", "p_skin_cauchy",
    "p_skin_numeric", "jump_at_fold", "basin_point", "basin_scan",
    "numeric_fold", "theory_bracket",
    "SweepRecord", "SweepResult", "quasi_static_sweep",
    "default_skin_threshold",
    "RunConfig", "parse_config", "load_config", "to_text",
    "Dataset", "to_csv", "to_json", "write_dataset", "FIGURES",
    "build_predict", "build_bifurcation", "build_trajectory",
    "build_basin", "build_sweep", "build_reproduce",
    "SkinflowError", "NumericalError", "StepSizeUnderflow",
    "MaxLengthExceeded", "OutOfSpan", "DegenerateTrajectory",
    "InsufficientEvents", "NoReturn", "NoConvergence", "StepUnderflow",
    "NoFoldInBranch", "BracketInvalid", "UndecidedAtMidpoint",
    "QuadratureFailure", "ConfigError", "UnknownFigure",
    "__version__",
]
