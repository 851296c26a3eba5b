"""Curvature-driven spectral-gap bounds and Wasserstein contraction rates.

The package is organised bottom-up:

- ``potential_measure``: potentials V, grid quadrature for mu = e^{-V}/Z,
  and curvature statistics (pointwise lower bound, mean, oscillation,
  Lipschitz seminorm, median).
- ``wi_certificates``: weighted transport-information certificates
  alpha(s) = s^2 / C with their Legendre transforms, built from a
  Poincare or log-Sobolev constant.
- ``bound_engine``: closed-form Poincare and W1-contraction bounds that
  combine curvature statistics with a certificate, plus the branch
  tournament that picks the best valid bound.
- ``spectral_oracle``: finite-difference ground truth for the 1d
  spectral gap, exact 1d Wasserstein distance, and an integrated
  curvature-energy margin.
- ``coupled_sde``: counter-based Monte Carlo for the overdamped
  Langevin dynamics; pathwise contraction, gradient commutation,
  exponential-functional and decay-rate checks.
- ``harness_cli``: JSON-driven command line harness producing reports,
  CSV curves and SVG figures.
"""

from .potential_measure import (
    GridMeasure,
    Potential,
    CurvatureStats,
    ScalarField,
    build_grid_measure,
    clip_curvature,
    curvature_at,
    curvature_stats,
    curvature_values,
    dilate,
    kappa_for_radial,
    make_cosine_perturbed_gaussian,
    make_custom_polynomial,
    make_gaussian,
    make_quartic,
    make_radial_power,
    potential_from_spec,
)
from .wi_certificates import (
    FunctionalStats,
    WICertificate,
    entropy_deviation_bound,
    from_curvature_stats,
    from_logsobolev,
    from_poincare,
    laplace_moment_bound,
    laplace_split_bound,
)
from .bound_engine import (
    BoundReport,
    auxiliary_poincare_bounds,
    be_baseline,
    best_poincare,
    compare_beta_branches,
    entropic_w1_rate,
    poincare_bound,
    poincare_bound_positive_curvature,
    solve_epsilon_quadratic,
    ultrabounded_direct_bound,
    w1_rate_kappa,
    w1_rate_logconcave,
    w1_rate_positive_curvature,
    w1_rate_rho,
)
from .spectral_oracle import (
    SpectralResult,
    gamma2_integral_margin,
    spectral_gap_1d,
    w1_exact_1d,
)
from .coupled_sde import (
    CoupledEnsemble,
    EstimateCI,
    SimConfig,
    check_derivative_flow,
    check_gradient_commutation,
    check_pathwise_contraction,
    empirical_w1,
    equilibrium_sampler_1d,
    estimate_exp_functional,
    pathwise_contraction_verdict,
    simulate,
    simulate_coupled,
    variance_decay_check,
    w1_decay_curve,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CoupledEnsemble",
    "CurvatureStats",
    "EstimateCI",
    "FunctionalStats",
    "GridMeasure",
    "Potential",
    "ScalarField",
    "SimConfig",
    "SpectralResult",
    "WICertificate",
    "auxiliary_poincare_bounds",
    "be_baseline",
    "best_poincare",
    "build_grid_measure",
    "check_derivative_flow",
    "check_gradient_commutation",
    "check_pathwise_contraction",
    "clip_curvature",
    "compare_beta_branches",
    "curvature_at",
    "curvature_stats",
    "curvature_values",
    "dilate",
    "empirical_w1",
    "entropic_w1_rate",
    "entropy_deviation_bound",
    "equilibrium_sampler_1d",
    "estimate_exp_functional",
    "from_curvature_stats",
    "from_logsobolev",
    "from_poincare",
    "gamma2_integral_margin",
    "kappa_for_radial",
    "laplace_moment_bound",
    "laplace_split_bound",
    "make_cosine_perturbed_gaussian",
    "make_custom_polynomial",
    "make_gaussian",
    "make_quartic",
    "make_radial_power",
    "pathwise_contraction_verdict",
    "poincare_bound",
    "poincare_bound_positive_curvature",
    "potential_from_spec",
    "simulate",
    "simulate_coupled",
    "solve_epsilon_quadratic",
    "spectral_gap_1d",
    "ultrabounded_direct_bound",
    "variance_decay_check",
    "w1_decay_curve",
    "w1_exact_1d",
    "w1_rate_kappa",
    "w1_rate_logconcave",
    "w1_rate_positive_curvature",
    "w1_rate_rho",
]
