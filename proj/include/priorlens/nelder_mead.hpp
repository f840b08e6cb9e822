#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace priorlens {

struct SimplexOptions {
    double tolerance = 1e-6;          // relative simplex size at convergence
    std::size_t max_evaluations = 20000;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Deterministic downhill simplex (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). The initial simplex perturbs each coordinate by 5% (0.00025
// when the coordinate is zero). Non-finite objective values are treated as
// +infinity.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start,
                          const SimplexOptions& opts = {});

} // namespace priorlens
