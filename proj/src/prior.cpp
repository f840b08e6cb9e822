#include "priorlens/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "priorlens/errors.hpp"

namespace priorlens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail_domain(const std::string& msg) { throw DomainError(msg); }

void check_positive_finite(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0)
        fail_domain(std::string(what) + " must be a positive finite real, got " +
                    std::to_string(v));
}

// Linear interpolation of a tabulated density; zero outside the support.
double tabulated_density(const Tabulated& tab, double x) {
    const auto& s = tab.support;
    if (x < s.front() || x > s.back()) return 0.0;
    auto it = std::upper_bound(s.begin(), s.end(), x);
    if (it == s.begin()) return tab.density.front();
    if (it == s.end()) return tab.density.back();
    const std::size_t hi = static_cast<std::size_t>(it - s.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - s[lo]) / (s[hi] - s[lo]);
    return tab.density[lo] + w * (tab.density[hi] - tab.density[lo]);
}

double trapezoid_sum(const std::vector<double>& xs, const std::vector<double>& ys) {
    double acc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        acc += 0.5 * (ys[i - 1] + ys[i]) * (xs[i] - xs[i - 1]);
    return acc;
}

// Upper end of the quadrature range in u = ln x. The power-law bound inverts
// the posterior survival ((x/t)^-gamma) exactly; Erlang likewise
// (exp(-(x-t)/beta)); Gaussian and Tabulated use fixed bounds.
double upper_log_bound(const PriorSpec& prior, double t, double tail_eps) {
    const double log_inv_eps = std::log(1.0 / tail_eps);
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PowerLaw>) {
                return std::log(t) + log_inv_eps / p.gamma;
            } else if constexpr (std::is_same_v<T, Erlang>) {
                return std::log(t + p.beta * log_inv_eps);
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                return std::log(std::max(p.mu, t) + 12.0 * p.sigma);
            } else {
                return std::log(p.support.back());
            }
        },
        prior);
}

struct LogGrid {
    double u_lo = 0.0;
    double h = 0.0;
    std::size_t n = 0;
    double u(std::size_t i) const { return u_lo + static_cast<double>(i) * h; }
};

// Posterior weights on the log grid, max-normalized so far tails never
// underflow to an all-zero array. In u = ln x the 1/x likelihood cancels the
// Jacobian: the integrand is just the prior density at e^u.
std::vector<double> grid_weights(const PriorSpec& prior, const LogGrid& g) {
    std::vector<double> logw(g.n);
    double max_logw = -kInf;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double w = log_prior_density(prior, std::exp(g.u(i)));
        logw[i] = w;
        if (w > max_logw) max_logw = w;
    }
    if (!(max_logw > -kInf))
        throw DegeneratePosteriorError("posterior has zero mass on the quadrature range");
    std::vector<double> phi(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        phi[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - max_logw) : 0.0;
    return phi;
}

double degenerate_at(double t) {
    throw DegeneratePosteriorError("posterior has zero mass above t=" + std::to_string(t));
}

} // namespace

void validate(const PriorSpec& prior) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PowerLaw>) {
                check_positive_finite(p.gamma, "gamma");
            } else if constexpr (std::is_same_v<T, Erlang>) {
                check_positive_finite(p.beta, "beta");
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                if (!std::isfinite(p.mu)) fail_domain("mu must be finite");
                check_positive_finite(p.sigma, "sigma");
            } else {
                const auto& s = p.support;
                if (s.size() < 2 || s.size() != p.density.size())
                    fail_domain("tabulated prior needs support and density of equal length >= 2");
                for (std::size_t i = 0; i < s.size(); ++i) {
                    if (!std::isfinite(s[i]) || s[i] <= 0.0)
                        fail_domain("tabulated support values must be positive finite reals");
                    if (i > 0 && !(s[i] > s[i - 1]))
                        fail_domain("tabulated support must be strictly increasing");
                    if (!std::isfinite(p.density[i]) || p.density[i] < 0.0)
                        fail_domain("tabulated density values must be nonnegative finite reals");
                }
                const double mass = trapezoid_sum(s, p.density);
                if (!std::isfinite(mass) || mass <= 0.0)
                    fail_domain("tabulated density must carry positive finite mass");
            }
        },
        prior);
}

void validate(const QuadratureConfig& cfg) {
    if (cfg.grid_points < 1025)
        fail_domain("grid_points must be at least 1025");
    if (!(cfg.tail_mass_epsilon > 0.0) || !(cfg.tail_mass_epsilon < 1e-3))
        fail_domain("tail_mass_epsilon must lie in (0, 1e-3)");
}

double prior_density(const PriorSpec& prior, double x) {
    validate(prior);
    check_positive_finite(x, "x");
    return std::visit(
        [x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PowerLaw>) {
                return std::pow(x, -p.gamma);
            } else if constexpr (std::is_same_v<T, Erlang>) {
                return x * std::exp(-x / p.beta);
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = (x - p.mu) / p.sigma;
                return std::exp(-0.5 * z * z) /
                       (p.sigma * std::sqrt(2.0 * std::numbers::pi));
            } else {
                return tabulated_density(p, x);
            }
        },
        prior);
}

double log_prior_density(const PriorSpec& prior, double x) {
    return std::visit(
        [x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PowerLaw>) {
                return -p.gamma * std::log(x);
            } else if constexpr (std::is_same_v<T, Erlang>) {
                return std::log(x) - x / p.beta;
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = (x - p.mu) / p.sigma;
                return -0.5 * z * z - std::log(p.sigma) -
                       0.5 * std::log(2.0 * std::numbers::pi);
            } else {
                const double d = tabulated_density(p, x);
                return d > 0.0 ? std::log(d) : -kInf;
            }
        },
        prior);
}

bool has_analytic_median(const PriorSpec& prior) {
    return std::holds_alternative<PowerLaw>(prior) || std::holds_alternative<Erlang>(prior);
}

double posterior_median_analytic(const PriorSpec& prior, double t) {
    validate(prior);
    check_positive_finite(t, "t");
    if (const auto* pl = std::get_if<PowerLaw>(&prior))
        return std::exp2(1.0 / pl->gamma) * t;
    if (const auto* er = std::get_if<Erlang>(&prior))
        return t + er->beta * std::numbers::ln2;
    throw UnsupportedFamilyError(
        "no closed-form posterior median for this family; use the numeric path");
}

double posterior_median_numeric(const PriorSpec& prior, double t,
                                const QuadratureConfig& cfg) {
    validate(prior);
    validate(cfg);
    check_positive_finite(t, "t");

    const double u_lo = std::log(t);
    const double u_hi = upper_log_bound(prior, t, cfg.tail_mass_epsilon);
    if (!(u_hi > u_lo)) degenerate_at(t);

    const LogGrid g{u_lo, (u_hi - u_lo) / static_cast<double>(cfg.grid_points - 1),
                    cfg.grid_points};
    const std::vector<double> phi = grid_weights(prior, g);

    std::vector<double> cum(g.n);
    cum[0] = 0.0;
    for (std::size_t i = 1; i < g.n; ++i)
        cum[i] = cum[i - 1] + 0.5 * (phi[i - 1] + phi[i]) * g.h;
    const double total = cum.back();
    if (!std::isfinite(total) || total <= 0.0) degenerate_at(t);

    const double target = 0.5 * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    const std::size_t hi = std::max<std::size_t>(1, static_cast<std::size_t>(it - cum.begin()));
    const std::size_t lo = hi - 1;
    const double frac = (target - cum[lo]) / (cum[hi] - cum[lo]);
    const double u_star = g.u(lo) + frac * g.h;
    return std::max(std::exp(u_star), t);
}

double posterior_median(const PriorSpec& prior, double t, const QuadratureConfig& cfg) {
    return has_analytic_median(prior) ? posterior_median_analytic(prior, t)
                                      : posterior_median_numeric(prior, t, cfg);
}

std::vector<double> batch_posterior_medians(const PriorSpec& prior,
                                            std::span<const double> ts,
                                            const QuadratureConfig& cfg) {
    validate(prior);
    validate(cfg);
    if (ts.empty()) fail_domain("batch_posterior_medians needs at least one t");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        check_positive_finite(ts[i], "t");
        if (i > 0 && ts[i] < ts[i - 1])
            fail_domain("batch_posterior_medians needs ts sorted ascending");
    }

    std::vector<double> out(ts.size());
    if (has_analytic_median(prior)) {
        for (std::size_t i = 0; i < ts.size(); ++i)
            out[i] = posterior_median_analytic(prior, ts[i]);
        return out;
    }

    const double t_lo = ts.front();
    const double u_lo = std::log(t_lo);
    const double u_hi = upper_log_bound(prior, ts.back(), cfg.tail_mass_epsilon);
    if (!(u_hi > u_lo)) degenerate_at(t_lo);

    const LogGrid g{u_lo, (u_hi - u_lo) / static_cast<double>(cfg.grid_points - 1),
                    cfg.grid_points};
    const std::vector<double> phi = grid_weights(prior, g);

    // Suffix mass from node i to the top of the range.
    std::vector<double> suf(g.n);
    suf[g.n - 1] = 0.0;
    for (std::size_t i = g.n - 1; i-- > 0;)
        suf[i] = suf[i + 1] + 0.5 * (phi[i] + phi[i + 1]) * g.h;

    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const double u_t = std::log(t);
        std::size_t j = 0;
        if (u_t > g.u_lo)
            j = std::min(static_cast<std::size_t>((u_t - g.u_lo) / g.h), g.n - 2);
        const double frac = std::clamp((u_t - g.u(j)) / g.h, 0.0, 1.0);
        const double mass_t = suf[j] + frac * (suf[j + 1] - suf[j]);
        if (!std::isfinite(mass_t) || mass_t <= 0.0) {
            // Shared grid cannot resolve this suffix; the per-t path
            // renormalizes locally and either succeeds or reports degeneracy.
            out[k] = posterior_median_numeric(prior, t, cfg);
            continue;
        }
        const double target = 0.5 * mass_t;
        // First node with suffix mass <= target; suf is nonincreasing.
        std::size_t hi = j + 1;
        {
            std::size_t lo_i = j + 1, hi_i = g.n - 1;
            while (lo_i < hi_i) {
                const std::size_t mid = lo_i + (hi_i - lo_i) / 2;
                if (suf[mid] <= target)
                    hi_i = mid;
                else
                    lo_i = mid + 1;
            }
            hi = lo_i;
        }
        const double lo_u = (hi == j + 1) ? u_t : g.u(hi - 1);
        const double lo_mass = (hi == j + 1) ? mass_t : suf[hi - 1];
        const double w = (lo_mass - target) / (lo_mass - suf[hi]);
        const double u_star = lo_u + w * (g.u(hi) - lo_u);
        out[k] = std::max(std::exp(u_star), t);
    }
    return out;
}

std::vector<PredictionPair> prediction_curve(const PriorSpec& prior,
                                             std::span<const double> t_values,
                                             const QuadratureConfig& cfg) {
    validate(prior);
    validate(cfg);
    if (t_values.empty()) fail_domain("prediction_curve needs a nonempty t grid");

    std::vector<PredictionPair> out;
    out.reserve(t_values.size());
    const bool analytic = has_analytic_median(prior);
    for (double t : t_values) {
        try {
            const double m = analytic ? posterior_median_analytic(prior, t)
                                      : posterior_median_numeric(prior, t, cfg);
            out.push_back({t, m});
        } catch (const DegeneratePosteriorError& e) {
            throw DegeneratePosteriorError("prediction failed at t=" + std::to_string(t) +
                                           ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError("prediction failed at t=" + std::to_string(t) + ": " +
                              e.what());
        }
    }
    return out;
}

} // namespace priorlens
