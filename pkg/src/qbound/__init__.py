"""qbound: phase-space information metrics and estimation-error bounds for one qubit."""

from .bounds import (
    AuditReport,
    BoundProblem,
    CmaxBreakdown,
    SweepRow,
    TheoremEvaluation,
    ab_coefficients,
    audit_derivation,
    bound_C,
    bound_Cmax,
    bounds_sweep,
    gaussian_b_reference,
    theorem_general,
)
from .derivatives import (
    R_MAX,
    R_MIN,
    coeff_h3r,
    coeff_k,
    coeff_k_tilde,
    deviation_h,
    new_log_derivative,
    rld,
    sld,
)
from .measurement import (
    EstimationContext,
    OutcomeDistribution,
    PovmFamily,
    ValidationReport,
    estimator_moments,
    gaussian_sharp_family,
    load_tabulated_csv,
    outcome_distribution,
    sample_outcomes,
    tabulated_family,
    tapered_sharp_family,
    validate_povm,
)
from .metrics import (
    MONOTONE_SPECS,
    MetricReport,
    MonotoneSpec,
    husimi_classical_metric,
    measurement_fisher,
    metric_report,
    monotone_metric,
    new_metric,
    rld_metric,
    sld_metric,
)
from .phasespace import husimi, husimi_partial, inverse_weyl, sw_kernel, weyl_map
from .quadrature import QuadSpec, QuadratureError, integrate_1d, sphere_integrate
from .qubit import (
    DomainError,
    ParamIndex,
    QubitState,
    d_rho,
    density_matrix,
    eig2,
    pauli_decomposition,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "BoundProblem",
    "CmaxBreakdown",
    "DomainError",
    "EstimationContext",
    "MONOTONE_SPECS",
    "MetricReport",
    "MonotoneSpec",
    "OutcomeDistribution",
    "ParamIndex",
    "PovmFamily",
    "QuadSpec",
    "QuadratureError",
    "QubitState",
    "R_MAX",
    "R_MIN",
    "SweepRow",
    "TheoremEvaluation",
    "ValidationReport",
    "ab_coefficients",
    "audit_derivation",
    "bound_C",
    "bound_Cmax",
    "bounds_sweep",
    "coeff_h3r",
    "coeff_k",
    "coeff_k_tilde",
    "d_rho",
    "density_matrix",
    "deviation_h",
    "eig2",
    "estimator_moments",
    "gaussian_b_reference",
    "gaussian_sharp_family",
    "husimi",
    "husimi_classical_metric",
    "husimi_partial",
    "integrate_1d",
    "inverse_weyl",
    "load_tabulated_csv",
    "measurement_fisher",
    "metric_report",
    "monotone_metric",
    "new_log_derivative",
    "new_metric",
    "outcome_distribution",
    "pauli_decomposition",
    "rld",
    "rld_metric",
    "sample_outcomes",
    "sld",
    "sld_metric",
    "sphere_integrate",
    "sw_kernel",
    "tabulated_family",
    "tapered_sharp_family",
    "theorem_general",
    "validate_povm",
    "weyl_map",
]
