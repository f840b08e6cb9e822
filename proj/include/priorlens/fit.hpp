#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "priorlens/errors.hpp"
#include "priorlens/prior.hpp"

namespace priorlens {

enum class Family { power_law, erlang, gaussian };

std::string_view family_name(Family f);          // "power-law" | "erlang" | "gaussian"
Family family_from_name(std::string_view name);  // accepts "powerlaw" for "power-law"

struct FitResult {
    Family family = Family::power_law;
    PriorSpec params;      // PowerLaw, Erlang, or Gaussian
    double mse = 0.0;      // squared scenario units
    std::size_t n = 0;     // pairs used
    bool boundary_flag = false;
};

enum class Aggregation { median, mean, none };

Aggregation aggregation_from_name(std::string_view name);
std::string_view aggregation_name(Aggregation a);

struct FitOptions {
    // Multi-start grid for the Gaussian fit: mu over these t* quantiles,
    // sigma over these multiples of stddev(t*).
    std::vector<double> mu_quantiles = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> sigma_factors = {0.1, 0.3, 1.0};
    double simplex_tolerance = 1e-6;
    std::size_t max_evaluations = 20000;   // per simplex start
    Aggregation replicate_aggregation = Aggregation::median;
    // Quadrature resolution while the simplex explores; the reported mse is
    // re-evaluated at the caller's QuadratureConfig.
    std::size_t objective_grid_points = 2049;
    bool parallel_starts = false;
};

void validate(const FitOptions& opts);

// No simplex start converged within max_evaluations; carries the best
// terminal point found.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, FitResult best_found)
        : Error(msg), best(std::move(best_found)) {}
    FitResult best;
};

/// Mean squared prediction error of `prior` on `pairs`:
/// (1/n) * sum (t*_i - predict(prior, t_i))^2. Numeric families are
/// evaluated on one shared grid at cfg resolution.
double mse(std::span<const PredictionPair> pairs, const PriorSpec& prior,
           const QuadratureConfig& cfg = {});

/// Exact MSE minimizer of t* = 2^(1/gamma) t: least-squares slope through the
/// origin c, then gamma = ln 2 / ln c. Slopes at or below 1 clamp to
/// 1 + 1e-9 and set boundary_flag.
FitResult fit_power_law(std::span<const PredictionPair> pairs);

/// Exact MSE minimizer of t* = t + beta ln 2: mean offset d, beta = d / ln 2.
/// Nonpositive offsets clamp beta to 1e-9 * mean(t) and set boundary_flag.
FitResult fit_erlang(std::span<const PredictionPair> pairs);

/// Multi-start downhill simplex over (mu, ln sigma); deterministic given the
/// inputs and options. Starts are merged by (objective value, start index).
FitResult fit_gaussian(std::span<const PredictionPair> pairs, const FitOptions& opts = {},
                       const QuadratureConfig& cfg = {});

// Drops pairs with nonpositive or non-finite entries; counts them.
std::vector<PredictionPair> filter_pairs(std::span<const PredictionPair> pairs,
                                         std::size_t* rejected = nullptr);

// Collapses pairs sharing the same t (median or mean of t*); output sorted by t.
std::vector<PredictionPair> collapse_replicates(std::vector<PredictionPair> pairs,
                                                Aggregation rule);

struct SelectDiagnostics {
    std::size_t rejected_pairs = 0;
    std::vector<std::pair<Family, std::string>> failures;
};

/// Fits all three families and returns the successful fits ascending by mse.
/// Ties within 1e-12 * (1 + mse) resolve to fewer parameters, then to the
/// fixed order power-law < erlang < gaussian. Families that error are
/// excluded and reported through `diag`.
std::vector<FitResult> select_model(std::span<const PredictionPair> pairs,
                                    const FitOptions& opts = {},
                                    const QuadratureConfig& cfg = {},
                                    SelectDiagnostics* diag = nullptr);

} // namespace priorlens
