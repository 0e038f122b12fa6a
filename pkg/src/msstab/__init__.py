"""Mean-square stability toolkit for theta-Maruyama / Milstein schemes
applied to the scalar linear test SDE with multiplicative noise."""

from .errors import (
    DegenerateDenominator,
    MsstabError,
    ValidationError,
    ZeroDrift,
)
from .model import (
    InitialState,
    TestEquation,
    exact_second_moment,
    exact_solution_at,
    is_sde_ms_stable,
    sde_stability_margin,
)
from .montecarlo import (
    ConvergenceResult,
    EnsembleResult,
    NoisePlan,
    aggregate_increments,
    estimate_convergence_order,
    gaussian_draw,
    run_ensemble,
    trajectory_noise,
)
from .schemes import (
    MethodSpec,
    NoiseDraw,
    SchemeKind,
    StepCoefficients,
    one_step,
    simulate_path,
    step_coefficients,
    step_factor,
)
from .stability import (
    RegionGrid,
    RegionSpec,
    StabilityReport,
    amplification_factor,
    is_method_ms_stable,
    max_stable_stepsize,
    method_stability_margin,
    mu_sum,
    rasterize_region,
    scaled_margin,
    stability_report,
    theta_opt,
    theta_tilde,
)

__version__ = "0.1.0"
