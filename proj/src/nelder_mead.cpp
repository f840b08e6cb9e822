#include "priorlens/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "priorlens/errors.hpp"

namespace priorlens {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

} // namespace

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start, const SimplexOptions& opts) {
    const std::size_t dim = start.size();
    if (dim == 0) throw DomainError("nelder_mead needs at least one dimension");
    if (!(opts.tolerance > 0.0)) throw DomainError("simplex tolerance must be positive");
    if (opts.max_evaluations < 100)
        throw DomainError("max_evaluations must be at least 100");

    SimplexResult res;
    res.evaluations = 0;

    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    // Vertices and their values; vertex 0 .. dim.
    std::vector<std::vector<double>> vx(dim + 1, std::vector<double>(start.begin(), start.end()));
    for (std::size_t i = 0; i < dim; ++i)
        vx[i + 1][i] += (start[i] != 0.0) ? 0.05 * start[i] : 0.00025;
    std::vector<double> vf(dim + 1);
    for (std::size_t v = 0; v <= dim; ++v) vf[v] = eval(vx[v]);

    std::vector<std::size_t> order(dim + 1);
    auto sort_order = [&] {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vf[a] < vf[b]; });
    };

    auto simplex_size = [&]() {
        const auto& best = vx[order[0]];
        double sz = 0.0;
        for (std::size_t v = 0; v <= dim; ++v) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double d = std::abs(vx[v][i] - best[i]) / (1.0 + std::abs(best[i]));
                sz = std::max(sz, d);
            }
        }
        return sz;
    };

    std::vector<double> centroid(dim), cand(dim);
    while (true) {
        sort_order();
        if (simplex_size() <= opts.tolerance) {
            res.converged = true;
            break;
        }
        if (res.evaluations >= opts.max_evaluations) break;

        const std::size_t worst = order[dim];
        const std::size_t second_worst = order[dim - 1];
        const std::size_t best = order[0];

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v <= dim; ++v) {
            if (v == worst) continue;
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += vx[v][i];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto move = [&](double scale) {
            for (std::size_t i = 0; i < dim; ++i)
                cand[i] = centroid[i] + scale * (centroid[i] - vx[worst][i]);
        };

        move(kReflect);
        const double f_reflect = eval(cand);
        if (f_reflect < vf[best]) {
            std::vector<double> reflected = cand;
            move(kExpand);
            const double f_expand = eval(cand);
            if (f_expand < f_reflect) {
                vx[worst] = cand;
                vf[worst] = f_expand;
            } else {
                vx[worst] = std::move(reflected);
                vf[worst] = f_reflect;
            }
        } else if (f_reflect < vf[second_worst]) {
            vx[worst] = cand;
            vf[worst] = f_reflect;
        } else {
            const bool outside = f_reflect < vf[worst];
            move(outside ? kContract : -kContract);
            const double f_contract = eval(cand);
            if (f_contract < (outside ? f_reflect : vf[worst])) {
                vx[worst] = cand;
                vf[worst] = f_contract;
            } else {
                for (std::size_t v = 0; v <= dim; ++v) {
                    if (v == best) continue;
                    for (std::size_t i = 0; i < dim; ++i)
                        vx[v][i] = vx[best][i] + kShrink * (vx[v][i] - vx[best][i]);
                    vf[v] = eval(vx[v]);
                }
            }
        }
    }

    sort_order();
    res.x = vx[order[0]];
    res.value = vf[order[0]];
    return res;
}

} // namespace priorlens
