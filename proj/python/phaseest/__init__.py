"""NOON-state phase estimation: Fourier posteriors, measurement schemes,
exact enumeration and Monte Carlo variance estimates."""

from ._core import (
    FeedbackPhase,
    PhaseLikelihood,
    SchemeSpec,
    TwoModeState,
    bayes_update,
    canonical_mu,
    collett_variance,
    copies_state,
    enumerate_exact,
    equal_probability_feedback,
    estimate_montecarlo,
    estimate_montecarlo_curve,
    extrapolate_two_copy_constant,
    flat_likelihood,
    heisenberg_limit_stddev,
    holevo_from_mu,
    holevo_variance,
    hybrid_bound,
    hybrid_bound_kappa,
    hybrid_state,
    maximize_expected_sharpness,
    noon_outcome_prob,
    number_moments,
    optimal_feedback,
    repetition_bound,
    rescale_level,
    run_config,
    run_trial,
    sweep,
    truncated,
    uniform_state,
    wrap_angle,
)

__all__ = [
    "FeedbackPhase",
    "PhaseLikelihood",
    "SchemeSpec",
    "TwoModeState",
    "bayes_update",
    "canonical_mu",
    "collett_variance",
    "copies_state",
    "enumerate_exact",
    "equal_probability_feedback",
    "estimate_montecarlo",
    "estimate_montecarlo_curve",
    "extrapolate_two_copy_constant",
    "flat_likelihood",
    "heisenberg_limit_stddev",
    "holevo_from_mu",
    "holevo_variance",
    "hybrid_bound",
    "hybrid_bound_kappa",
    "hybrid_state",
    "maximize_expected_sharpness",
    "noon_outcome_prob",
    "number_moments",
    "optimal_feedback",
    "repetition_bound",
    "rescale_level",
    "run_config",
    "run_trial",
    "sweep",
    "truncated",
    "uniform_state",
    "wrap_angle",
]
