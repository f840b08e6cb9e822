#include "priorlens/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>

#include "priorlens/nelder_mead.hpp"

namespace priorlens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pairs(std::span<const PredictionPair> pairs, std::size_t minimum,
                 const char* who) {
    if (pairs.size() < minimum)
        throw InsufficientDataError(std::string(who) + " needs at least " +
                                    std::to_string(minimum) + " pairs, got " +
                                    std::to_string(pairs.size()));
    for (const auto& p : pairs) {
        if (!std::isfinite(p.t) || p.t <= 0.0)
            throw DomainError("pair t values must be positive finite reals");
        if (!std::isfinite(p.t_star))
            throw DomainError("pair t* values must be finite");
    }
}

int param_count(Family f) { return f == Family::gaussian ? 2 : 1; }

// Linear-interpolated quantile of sorted values (the R type-7 rule).
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double sample_stddev(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) /
                        static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

struct SortedView {
    std::vector<double> ts;       // ascending
    std::vector<std::size_t> to_sorted; // original index -> sorted position
};

SortedView sort_by_t(std::span<const PredictionPair> pairs) {
    SortedView v;
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return pairs[a].t < pairs[b].t; });
    v.ts.resize(pairs.size());
    v.to_sorted.resize(pairs.size());
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        v.ts[pos] = pairs[idx[pos]].t;
        v.to_sorted[idx[pos]] = pos;
    }
    return v;
}

double mean_square_residual(std::span<const PredictionPair> pairs,
                            const std::vector<double>& medians,
                            const std::vector<std::size_t>& to_sorted) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double r = pairs[i].t_star - medians[to_sorted[i]];
        acc += r * r;
    }
    return acc / static_cast<double>(pairs.size());
}

} // namespace

std::string_view family_name(Family f) {
    switch (f) {
        case Family::power_law: return "power-law";
        case Family::erlang: return "erlang";
        case Family::gaussian: return "gaussian";
    }
    return "power-law";
}

Family family_from_name(std::string_view name) {
    if (name == "power-law" || name == "powerlaw" || name == "power_law")
        return Family::power_law;
    if (name == "erlang") return Family::erlang;
    if (name == "gaussian") return Family::gaussian;
    throw DomainError("unknown family: " + std::string(name));
}

Aggregation aggregation_from_name(std::string_view name) {
    if (name == "median") return Aggregation::median;
    if (name == "mean") return Aggregation::mean;
    if (name == "none") return Aggregation::none;
    throw DomainError("unknown aggregation rule: " + std::string(name));
}

std::string_view aggregation_name(Aggregation a) {
    switch (a) {
        case Aggregation::median: return "median";
        case Aggregation::mean: return "mean";
        case Aggregation::none: return "none";
    }
    return "median";
}

void validate(const FitOptions& opts) {
    if (!(opts.simplex_tolerance > 0.0))
        throw DomainError("simplex_tolerance must be positive");
    if (opts.max_evaluations < 100)
        throw DomainError("max_evaluations must be at least 100");
    if (opts.mu_quantiles.empty() || opts.sigma_factors.empty())
        throw DomainError("the Gaussian start grid must be nonempty");
    for (double q : opts.mu_quantiles)
        if (!(q >= 0.0) || !(q <= 1.0))
            throw DomainError("mu quantiles must lie in [0, 1]");
    for (double f : opts.sigma_factors)
        if (!std::isfinite(f) || f <= 0.0)
            throw DomainError("sigma factors must be positive finite reals");
    if (opts.objective_grid_points < 1025)
        throw DomainError("objective_grid_points must be at least 1025");
}

double mse(std::span<const PredictionPair> pairs, const PriorSpec& prior,
           const QuadratureConfig& cfg) {
    if (pairs.empty()) throw EmptyDataError("mse needs at least one pair");
    check_pairs(pairs, 1, "mse");
    validate(prior);
    const SortedView view = sort_by_t(pairs);
    const std::vector<double> medians = batch_posterior_medians(prior, view.ts, cfg);
    return mean_square_residual(pairs, medians, view.to_sorted);
}

FitResult fit_power_law(std::span<const PredictionPair> pairs) {
    check_pairs(pairs, 2, "fit_power_law");
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : pairs) {
        sxy += p.t * p.t_star;
        sxx += p.t * p.t;
    }
    double c = sxy / sxx;
    FitResult res;
    res.family = Family::power_law;
    res.n = pairs.size();
    if (!(c > 1.0 + 1e-9)) {
        c = 1.0 + 1e-9;
        res.boundary_flag = true;
    }
    res.params = PowerLaw{std::numbers::ln2 / std::log(c)};
    res.mse = mse(pairs, res.params);
    return res;
}

FitResult fit_erlang(std::span<const PredictionPair> pairs) {
    check_pairs(pairs, 2, "fit_erlang");
    double off = 0.0, mean_t = 0.0;
    for (const auto& p : pairs) {
        off += p.t_star - p.t;
        mean_t += p.t;
    }
    off /= static_cast<double>(pairs.size());
    mean_t /= static_cast<double>(pairs.size());
    FitResult res;
    res.family = Family::erlang;
    res.n = pairs.size();
    if (!(off > 0.0)) {
        res.params = Erlang{1e-9 * mean_t};
        res.boundary_flag = true;
    } else {
        res.params = Erlang{off / std::numbers::ln2};
    }
    res.mse = mse(pairs, res.params);
    return res;
}

FitResult fit_gaussian(std::span<const PredictionPair> pairs, const FitOptions& opts,
                       const QuadratureConfig& cfg) {
    check_pairs(pairs, 3, "fit_gaussian");
    validate(opts);
    validate(cfg);

    const SortedView view = sort_by_t(pairs);
    std::vector<double> stars(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) stars[i] = pairs[i].t_star;
    std::vector<double> stars_sorted = stars;
    std::sort(stars_sorted.begin(), stars_sorted.end());

    const double mean_star = std::accumulate(stars.begin(), stars.end(), 0.0) /
                             static_cast<double>(stars.size());
    double sd = sample_stddev(stars);
    if (!(sd > 0.0)) sd = 1e-9 * std::max(1.0, std::abs(mean_star));

    const QuadratureConfig objective_cfg{opts.objective_grid_points, cfg.tail_mass_epsilon};
    auto objective = [&](std::span<const double> x) -> double {
        const double mu = x[0];
        const double sigma = std::exp(x[1]);
        if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0) return kInf;
        try {
            const std::vector<double> medians =
                batch_posterior_medians(Gaussian{mu, sigma}, view.ts, objective_cfg);
            const double v = mean_square_residual(pairs, medians, view.to_sorted);
            return std::isfinite(v) ? v : kInf;
        } catch (const DegeneratePosteriorError&) {
            return kInf;
        }
    };

    std::vector<std::array<double, 2>> starts;
    for (double q : opts.mu_quantiles)
        for (double f : opts.sigma_factors)
            starts.push_back({quantile_sorted(stars_sorted, q), std::log(f * sd)});

    const SimplexOptions sopts{opts.simplex_tolerance, opts.max_evaluations};
    std::vector<SimplexResult> runs(starts.size());
    auto run_start = [&](std::size_t i) {
        return nelder_mead(objective, starts[i], sopts);
    };
    if (opts.parallel_starts) {
        std::vector<std::future<SimplexResult>> futs;
        futs.reserve(starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i)
            futs.push_back(std::async(std::launch::async, run_start, i));
        for (std::size_t i = 0; i < starts.size(); ++i) runs[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) runs[i] = run_start(i);
    }

    // Merge deterministically by (objective value, start index).
    std::size_t best = 0;
    bool any_converged = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        any_converged = any_converged || runs[i].converged;
        if (runs[i].value < runs[best].value) best = i;
    }

    FitResult res;
    res.family = Family::gaussian;
    res.n = pairs.size();
    res.params = Gaussian{runs[best].x[0], std::exp(runs[best].x[1])};
    res.mse = mse(pairs, res.params, cfg);
    if (!any_converged)
        throw ConvergenceError("no simplex start converged within " +
                                   std::to_string(opts.max_evaluations) + " evaluations",
                               res);
    return res;
}

std::vector<PredictionPair> filter_pairs(std::span<const PredictionPair> pairs,
                                         std::size_t* rejected) {
    std::vector<PredictionPair> kept;
    kept.reserve(pairs.size());
    std::size_t dropped = 0;
    for (const auto& p : pairs) {
        const bool ok = std::isfinite(p.t) && p.t > 0.0 && std::isfinite(p.t_star) &&
                        p.t_star > 0.0;
        if (ok)
            kept.push_back(p);
        else
            ++dropped;
    }
    if (rejected) *rejected = dropped;
    return kept;
}

std::vector<PredictionPair> collapse_replicates(std::vector<PredictionPair> pairs,
                                                Aggregation rule) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const PredictionPair& a, const PredictionPair& b) { return a.t < b.t; });
    if (rule == Aggregation::none) return pairs;

    std::vector<PredictionPair> out;
    std::size_t i = 0;
    while (i < pairs.size()) {
        std::size_t j = i;
        std::vector<double> group;
        while (j < pairs.size() && pairs[j].t == pairs[i].t) group.push_back(pairs[j++].t_star);
        double value;
        if (rule == Aggregation::mean) {
            value = std::accumulate(group.begin(), group.end(), 0.0) /
                    static_cast<double>(group.size());
        } else {
            std::sort(group.begin(), group.end());
            const std::size_t m = group.size() / 2;
            value = (group.size() % 2 == 1) ? group[m] : 0.5 * (group[m - 1] + group[m]);
        }
        out.push_back({pairs[i].t, value});
        i = j;
    }
    return out;
}

std::vector<FitResult> select_model(std::span<const PredictionPair> pairs,
                                    const FitOptions& opts, const QuadratureConfig& cfg,
                                    SelectDiagnostics* diag) {
    validate(opts);
    std::size_t rejected = 0;
    std::vector<PredictionPair> usable = filter_pairs(pairs, &rejected);
    if (diag) diag->rejected_pairs = rejected;
    if (opts.replicate_aggregation != Aggregation::none)
        usable = collapse_replicates(std::move(usable), opts.replicate_aggregation);
    if (usable.size() < 3)
        throw InsufficientDataError("select_model needs at least 3 usable pairs, got " +
                                    std::to_string(usable.size()));

    std::vector<FitResult> fits;
    auto attempt = [&](Family fam, auto&& fn) {
        try {
            fits.push_back(fn());
        } catch (const ConvergenceError& e) {
            if (diag) diag->failures.emplace_back(fam, e.what());
        } catch (const Error& e) {
            if (diag) diag->failures.emplace_back(fam, e.what());
        }
    };
    attempt(Family::power_law, [&] { return fit_power_law(usable); });
    attempt(Family::erlang, [&] { return fit_erlang(usable); });
    attempt(Family::gaussian, [&] { return fit_gaussian(usable, opts, cfg); });

    // Ascending mse; ties go to fewer parameters, then fixed family order.
    auto tied = [](const FitResult& a, const FitResult& b) {
        return std::abs(a.mse - b.mse) <= 1e-12 * (1.0 + std::min(a.mse, b.mse));
    };
    auto before = [&](const FitResult& a, const FitResult& b) {
        if (!tied(a, b)) return a.mse < b.mse;
        if (param_count(a.family) != param_count(b.family))
            return param_count(a.family) < param_count(b.family);
        return static_cast<int>(a.family) < static_cast<int>(b.family);
    };
    std::vector<FitResult> ranked;
    for (auto& f : fits) {
        auto pos = ranked.begin();
        while (pos != ranked.end() && !before(f, *pos)) ++pos;
        ranked.insert(pos, std::move(f));
    }
    return ranked;
}

} // namespace priorlens
