"""Kernel estimation with data-driven kernel selection by comparison to overfitting.

The estimator is the sample average of kernel sections weighted by a
transform of the responses; choosing the transform targets the design
density, the regression-weighted density, or the second-moment-weighted
density.  Selection minimizes the squared distance to a deliberately
overfitting reference estimator plus a penalty built from the same Gram
tables that power the criterion.
"""

from .bases import (
    BasisFamily,
    BasisKind,
    basis_matrix,
    breakpoints,
    cross_gram,
    eval_basis,
    normalized_legendre,
    sine_tail_max_violation,
    squared_sum,
    sup_squared_sum,
)
from .diagnostics import (
    CheckReport,
    check_kernel_moment_conditions,
    check_l1_section_bound,
    check_legendre_boundedness,
    check_sine_tail_bound,
    check_trig_spectral_boundedness,
    zeta_three_halves,
)
from .errors import ConfigError, DataError, DimensionError, VerificationFailure
from .estimator import (
    GramTables,
    LossKind,
    Sample,
    criterion_distance,
    estimate,
    estimate_on_grid,
    estimator_inner,
    read_sample_csv,
    sbar_empirical,
    u_statistic,
    v_statistic,
    w_statistic,
    write_sample_csv,
)
from .experiments import (
    ConcentrationReport,
    MCRisk,
    RiskReport,
    concentration_experiment,
    mc_risk,
    oracle_experiment,
    statistic_grid,
)
from .kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    BandwidthSpec,
    BaseKernel,
    KernelFamily,
    ProjectionSpec,
    diag_sup,
    find_overfitting_k0,
    kernel_eval,
    kernel_matrix,
    make_bandwidth_family,
    make_projection_family,
    section_inner,
    section_inner_matrix,
    section_l1_norm,
    section_sq_norm,
    spec_from_config,
    spec_id,
    spec_to_config,
)
from .quadrature import IntegrationGrid, composite_grid, composite_rule, trapezoid_grid
from .rng import stream
from .selection import (
    OUTSIDE_DOMAIN,
    QuotientConfig,
    SelectionReport,
    SelectionRow,
    pco_select,
    penalty,
    quotient_estimate,
    quotient_on_grid,
)
from .simulation import (
    Density,
    DensityKind,
    MeanKind,
    NoiseKind,
    Scenario,
    SigmaKind,
    make_s_mean,
    sbar_analytic,
    scenario_from_config,
)

__version__ = "0.1.0"

__all__ = [
    "BasisFamily",
    "BasisKind",
    "basis_matrix",
    "breakpoints",
    "cross_gram",
    "eval_basis",
    "normalized_legendre",
    "sine_tail_max_violation",
    "squared_sum",
    "sup_squared_sum",
    "CheckReport",
    "check_kernel_moment_conditions",
    "check_l1_section_bound",
    "check_legendre_boundedness",
    "check_sine_tail_bound",
    "check_trig_spectral_boundedness",
    "zeta_three_halves",
    "ConfigError",
    "DataError",
    "DimensionError",
    "VerificationFailure",
    "GramTables",
    "LossKind",
    "Sample",
    "criterion_distance",
    "estimate",
    "estimate_on_grid",
    "estimator_inner",
    "read_sample_csv",
    "sbar_empirical",
    "u_statistic",
    "v_statistic",
    "w_statistic",
    "write_sample_csv",
    "ConcentrationReport",
    "MCRisk",
    "RiskReport",
    "concentration_experiment",
    "mc_risk",
    "oracle_experiment",
    "statistic_grid",
    "EPANECHNIKOV",
    "GAUSSIAN",
    "BandwidthSpec",
    "BaseKernel",
    "KernelFamily",
    "ProjectionSpec",
    "diag_sup",
    "find_overfitting_k0",
    "kernel_eval",
    "kernel_matrix",
    "make_bandwidth_family",
    "make_projection_family",
    "section_inner",
    "section_inner_matrix",
    "section_l1_norm",
    "section_sq_norm",
    "spec_from_config",
    "spec_id",
    "spec_to_config",
    "IntegrationGrid",
    "composite_grid",
    "composite_rule",
    "trapezoid_grid",
    "stream",
    "OUTSIDE_DOMAIN",
    "QuotientConfig",
    "SelectionReport",
    "SelectionRow",
    "pco_select",
    "penalty",
    "quotient_estimate",
    "quotient_on_grid",
    "Density",
    "DensityKind",
    "MeanKind",
    "NoiseKind",
    "Scenario",
    "SigmaKind",
    "make_s_mean",
    "sbar_analytic",
    "scenario_from_config",
]
