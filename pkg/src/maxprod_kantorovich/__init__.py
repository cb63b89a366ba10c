"""Max-product Kantorovich sampling operators in Orlicz spaces.

A numerical library for the nonlinear (max-product) Kantorovich operators
built from sigmoidal density kernels, together with the machinery needed
to verify their convergence behaviour empirically: modular integrals over
convex phi-functions, a constructive smoothness K-functional, and a sweep
harness with deterministic CSV/JSON/SVG reports.
"""

from ._version import __version__
from .functions import TestFunction, abs_diff, add, corpus, scale, shift
from .harness import (
    ExperimentConfig,
    SweepReport,
    emit_report,
    run_eval,
    run_modular_convergence,
    run_modular_inequality,
    run_rate_suite,
    run_uniform_convergence,
    run_validate_kernel,
)
from .kfunctional import (
    KFunctionalEstimate,
    RateBoundReport,
    SmootherCandidate,
    build_smoother_family,
    choose_lambda1,
    estimate_k_functional,
    fidelity_profile,
    smooth_rate_check,
    theorem_constants,
    verify_rate_bound,
)
from .operator import (
    DegenerateDenominatorError,
    KantorovichMeans,
    OperatorInstance,
    OperatorUndefinedError,
    denominator_profile,
    evaluate,
    evaluate_grid,
    evaluate_shifted,
    evaluate_shifted_grid,
    index_set,
    kantorovich_means,
    make_operator,
)
from .orlicz import (
    Delta2Report,
    GridFunction,
    ModularValue,
    PhiFunction,
    build_phi,
    delta2_check,
    luxemburg_norm,
    make_exponential,
    make_power_phi,
    make_zygmund,
    modular,
    modular_distance,
    modular_on_grid,
    parse_phi_spec,
)
from .quadrature import (
    IntegrationRequest,
    IntegrationResult,
    QuadratureError,
    integrate,
    integrate_decaying,
)
from .sigmoids import (
    AssumptionReport,
    DensityKernel,
    MomentReport,
    SigmoidalFunction,
    kernel_catalog,
    load_kernel,
    load_sigmoid_csv,
    make_density_kernel,
    make_logistic,
    make_ramp,
    make_step,
    make_tabulated,
    make_tanh,
    moment,
    validate_assumptions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
