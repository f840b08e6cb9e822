#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace priorlens {

// Prior families over the unknown total t_total. Densities are kept
// unnormalized: the posterior median is invariant to prior scale, and the
// power law on (0, inf) has no normalizing constant anyway.

struct PowerLaw {
    double gamma = 1.0; // P(x) proportional to x^-gamma
};

struct Erlang {
    double beta = 1.0; // P(x) proportional to x * exp(-x / beta)
};

struct Gaussian {
    double mu = 0.0;
    double sigma = 1.0;
};

// Density given on a strictly increasing positive support grid, linearly
// interpolated inside the support and zero outside.
struct Tabulated {
    std::vector<double> support;
    std::vector<double> density;
};

using PriorSpec = std::variant<PowerLaw, Erlang, Gaussian, Tabulated>;

// One observation: partial value t and the predicted total t*.
// t* >= t holds for model-generated pairs but is not enforced here; elicited
// predictors are free to violate it.
struct PredictionPair {
    double t = 0.0;
    double t_star = 0.0;
};

// Controls the numeric posterior-median path. The grid is uniform in ln x
// between t and a family-specific truncation point chosen so the discarded
// tail holds less than tail_mass_epsilon of the posterior mass.
struct QuadratureConfig {
    std::size_t grid_points = 32769;
    double tail_mass_epsilon = 1e-9;
};

void validate(const PriorSpec& prior);
void validate(const QuadratureConfig& cfg);

/// Unnormalized prior density at x > 0.
double prior_density(const PriorSpec& prior, double x);

/// ln prior_density; -inf where the density vanishes.
double log_prior_density(const PriorSpec& prior, double x);

bool has_analytic_median(const PriorSpec& prior);

/// Closed-form posterior median under the 1/t_total likelihood:
/// power law -> 2^(1/gamma) * t, Erlang -> t + beta * ln 2.
/// Other families throw UnsupportedFamilyError.
double posterior_median_analytic(const PriorSpec& prior, double t);

/// Quadrature posterior median: posterior density proportional to
/// prior_density(x)/x on [t, T_max], trapezoid cumulative, linearly
/// interpolated 0.5 quantile. Always >= t.
double posterior_median_numeric(const PriorSpec& prior, double t,
                                const QuadratureConfig& cfg = {});

/// Analytic when available, numeric otherwise.
double posterior_median(const PriorSpec& prior, double t,
                        const QuadratureConfig& cfg = {});

/// Medians for many t values from one shared grid spanning
/// [min t, T_max(max t)]. Same integrand as the per-t path; suffix sums are
/// accumulated right-to-left so far-tail truncations keep full relative
/// precision. ts must be sorted ascending. Falls back to the per-t path for
/// any t whose suffix mass degenerates.
std::vector<double> batch_posterior_medians(const PriorSpec& prior,
                                            std::span<const double> ts,
                                            const QuadratureConfig& cfg = {});

/// Element-wise posterior median over t_values, preserving input order.
std::vector<PredictionPair> prediction_curve(const PriorSpec& prior,
                                             std::span<const double> t_values,
                                             const QuadratureConfig& cfg = {});

} // namespace priorlens
