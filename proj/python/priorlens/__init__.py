"""Posterior-median prediction functions and implicit-prior recovery."""

from ._core import (  # noqa: F401
    Aggregation,
    Erlang,
    Family,
    FitOptions,
    FitResult,
    Gaussian,
    PowerLaw,
    PredictionPair,
    QuadratureConfig,
    ScenarioDef,
    Tabulated,
    __version__,
    builtin_scenarios,
    fit_erlang,
    fit_gaussian,
    fit_power_law,
    mse,
    parse_response,
    posterior_median,
    posterior_median_analytic,
    posterior_median_numeric,
    prediction_curve,
    prior_density,
    read_pairs,
    render_prompt,
    select_model,
    write_fit,
)
