"""survpower: power and sample size for marginal hazard ratios.

Closed-form design variances for randomized trials and IPW-analyzed
observational studies, a Beta-model overlap calculus, design-effect Monte
Carlo for general balancing weights, residual sensitivity bounds, a weighted
Cox estimation engine with robust variance, and a seed-deterministic
simulation harness that verifies the formulas empirically.
"""

__version__ = "0.1.0"

from .design_effect import (
    KappaEstimate,
    WeightScheme,
    ipw_scheme,
    kappa_de_monte_carlo,
    kappa_discrepancy,
    kappa_ipw_analytic,
    kish_design_effect,
    overlap_scheme,
    sample_size_with_vif,
    treated_scheme,
    vif_analytic_ratio,
)
from .errors import (
    CalibrationError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    ExistenceError,
    InfiniteVarianceError,
    PayloadError,
    RankDeficiencyError,
    SeparationError,
    SurvPowerError,
)
from .formulas import (
    DesignInputs,
    GammaThreshold,
    LambdaPair,
    Variance,
    conservativeness_gamma,
    lambda_pair,
    power_at_n,
    ratio_freedman,
    ratio_schoenfeld,
    sample_size,
    sample_size_raw,
    v_freedman,
    v_hsieh_lavori,
    v_obs,
    v_rct,
    v_rct_equal_censoring,
    v_schoenfeld,
)
from .cox import (
    CoxFit,
    LogisticFit,
    SubjectRecord,
    SurvivalData,
    WaldResult,
    fit_logistic_ps,
    fit_weighted_cox,
    kaplan_meier,
    read_subjects_csv,
    robust_variance,
    wald_test,
)
from .overlap import (
    BetaMoments,
    BetaOverlap,
    beta_moments,
    min_phi_for_finite_variance,
    overlap_category,
    phi_from_ab,
    solve_ab,
)
from .sensitivity import (
    EpsilonBound,
    SensitivityInputs,
    epsilon_bound,
    m1_values,
)
from .simulation import (
    AnalysisSpec,
    PowerEstimate,
    ScenarioSpec,
    SimConfig,
    Superpopulation,
    calibrate_alpha,
    calibrate_followup_and_censoring,
    calibrate_overlap,
    empirical_phi,
    empirical_power,
    generate_superpopulation,
    run_scenario,
)
