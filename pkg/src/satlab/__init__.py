"""Tikhonov regularization workbench.

Finite-dimensional Hilbert space models, a damped Gauss-Newton Tikhonov
solver with a closed-form linearized companion, discrepancy-based and a
priori parameter choice rules, banded worst-case noise constructions,
and the experiment harness that measures convergence rates and probes
the square-root saturation barrier.
"""

from .adversary import (
    AdversarialChecks,
    AdversarialDatum,
    adversarial_lower_bound,
    band_eigenvalue,
    make_adversarial_datum,
    verify_adversarial_inequalities,
)
from .config import (
    ExperimentConfig,
    build_instance,
    load_config,
    parse_config,
    serialize_config,
)
from .errors import (
    ConfigError,
    DomainError,
    ExperimentError,
    HypothesisViolationError,
    InsufficientDataError,
    InvalidInputError,
    NonconvergenceError,
    NoSolutionError,
    SatlabError,
)
from .experiments import (
    RateReport,
    SaturationReport,
    check_source_condition_bounds,
    constant_report,
    fit_slope,
    linearization_identity_check,
    rate_experiment,
    run_verification,
    saturation_probe,
    sup_error,
)
from .hilbert import (
    SpectralDecomposition,
    SpectralProjector,
    band_projector,
    decompose,
    inner,
    norm,
    resolvent_apply,
    resolvent_apply_y,
)
from .models import (
    CompositionModel,
    LinearModel,
    NoisyObservation,
    ProblemInstance,
    SourcePrior,
    add_noise,
    default_ground_truth,
    make_composition_model,
    make_diagonal_linear,
    synthesize_instance,
    unit_direction,
)
from .rules import (
    SelectionResult,
    SelectorConfig,
    alpha_lower_bound_check,
    apriori_select,
    discrepancy_select,
    select_alpha,
    sequential_select,
)
from .tikhonov import (
    TikhonovResult,
    continuation_solve,
    euler_residual,
    solve_linearized,
    solve_nonlinear,
    tikhonov_functional,
)

__version__ = "0.1.0"
