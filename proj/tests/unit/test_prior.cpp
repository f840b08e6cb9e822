#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "priorlens/errors.hpp"
#include "priorlens/prior.hpp"

using namespace priorlens;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

const Tabulated kTriangle{{1.0, 2.0, 3.0, 4.0}, {0.0, 1.0, 1.0, 0.0}};

} // namespace

TEST_SUITE("prior_density") {
    TEST_CASE("power law is x^-gamma") {
        CHECK(prior_density(PowerLaw{1.0}, 2.0) == 0.5);
        CHECK(prior_density(PowerLaw{2.0}, 4.0) == doctest::Approx(1.0 / 16).epsilon(1e-14));
    }

    TEST_CASE("erlang is x exp(-x/beta)") {
        // oracle: 1 * exp(-1)
        CHECK(rel_err(prior_density(Erlang{1.0}, 1.0), 0.36787944117144233) < 1e-15);
        CHECK(rel_err(prior_density(Erlang{18.09}, 10.0),
                      10.0 * std::exp(-10.0 / 18.09)) < 1e-15);
    }

    TEST_CASE("gaussian matches the normal pdf") {
        // oracle: standard normal pdf at 1
        CHECK(rel_err(prior_density(Gaussian{0.0, 1.0}, 1.0), 0.24197072451914337) < 1e-15);
    }

    TEST_CASE("gaussian at x=0 is a domain error, not a value") {
        CHECK_THROWS_AS(prior_density(Gaussian{0.0, 1.0}, 0.0), DomainError);
    }

    TEST_CASE("tabulated interpolates linearly and vanishes outside") {
        CHECK(prior_density(kTriangle, 1.5) == 0.5);
        CHECK(prior_density(kTriangle, 2.5) == 1.0);
        CHECK(prior_density(kTriangle, 0.5) == 0.0);
        CHECK(prior_density(kTriangle, 4.5) == 0.0);
        CHECK(prior_density(kTriangle, 4.0) == 0.0);
    }

    TEST_CASE("rejects bad x") {
        CHECK_THROWS_AS(prior_density(PowerLaw{1.0}, -1.0), DomainError);
        CHECK_THROWS_AS(prior_density(PowerLaw{1.0}, 0.0), DomainError);
        CHECK_THROWS_AS(prior_density(PowerLaw{1.0},
                                      std::numeric_limits<double>::infinity()),
                        DomainError);
        CHECK_THROWS_AS(prior_density(PowerLaw{1.0},
                                      std::numeric_limits<double>::quiet_NaN()),
                        DomainError);
    }

    TEST_CASE("rejects bad parameters") {
        CHECK_THROWS_AS(prior_density(PowerLaw{0.0}, 1.0), DomainError);
        CHECK_THROWS_AS(prior_density(PowerLaw{-1.0}, 1.0), DomainError);
        CHECK_THROWS_AS(prior_density(Erlang{0.0}, 1.0), DomainError);
        CHECK_THROWS_AS(prior_density(Gaussian{0.0, 0.0}, 1.0), DomainError);
        CHECK_THROWS_AS(prior_density(Tabulated{{2.0, 1.0}, {1.0, 1.0}}, 1.5), DomainError);
        CHECK_THROWS_AS(prior_density(Tabulated{{-1.0, 1.0}, {1.0, 1.0}}, 0.5), DomainError);
        CHECK_THROWS_AS(prior_density(Tabulated{{1.0, 2.0}, {0.0, 0.0}}, 1.5), DomainError);
    }
}

TEST_SUITE("posterior_median_analytic") {
    TEST_CASE("gamma=1 doubles t") {
        CHECK(posterior_median_analytic(PowerLaw{1.0}, 7.0) == 14.0);
    }

    TEST_CASE("power law general") {
        // oracle: 50 * 2^(1/1.2)
        CHECK(rel_err(posterior_median_analytic(PowerLaw{1.2}, 50.0), 89.08987181403393) <
              1e-13);
    }

    TEST_CASE("erlang adds beta ln 2") {
        // oracle: 30 + 18.09 * ln 2
        CHECK(rel_err(posterior_median_analytic(Erlang{18.09}, 30.0), 42.53903249632941) <
              1e-13);
    }

    TEST_CASE("no closed form for gaussian or tabulated") {
        CHECK_THROWS_AS(posterior_median_analytic(Gaussian{1.0, 1.0}, 1.0),
                        UnsupportedFamilyError);
        CHECK_THROWS_AS(posterior_median_analytic(kTriangle, 1.0), UnsupportedFamilyError);
    }

    TEST_CASE("rejects t <= 0") {
        CHECK_THROWS_AS(posterior_median_analytic(PowerLaw{1.0}, 0.0), DomainError);
    }
}

TEST_SUITE("posterior_median_numeric") {
    TEST_CASE("agrees with the closed forms") {
        for (double gamma : {0.5, 1.0, 1.15, 1.2, 2.0, 5.0}) {
            for (double t : {1.0, 10.0, 100.0}) {
                const double analytic = posterior_median_analytic(PowerLaw{gamma}, t);
                const double numeric = posterior_median_numeric(PowerLaw{gamma}, t);
                CHECK_MESSAGE(rel_err(numeric, analytic) <= 1e-3,
                              "gamma=", gamma, " t=", t, " numeric=", numeric,
                              " analytic=", analytic);
            }
        }
        for (double beta : {1.0, 18.09, 100.0}) {
            for (double t : {1.0, 30.0, 70.0}) {
                const double analytic = posterior_median_analytic(Erlang{beta}, t);
                const double numeric = posterior_median_numeric(Erlang{beta}, t);
                CHECK_MESSAGE(rel_err(numeric, analytic) <= 1e-3, "beta=", beta, " t=", t);
            }
        }
    }

    TEST_CASE("gaussian body: median sits just under the mean") {
        // oracle (high-precision quadrature): 99.98999833263957
        const double v = posterior_median_numeric(Gaussian{100.0, 1.0}, 10.0);
        CHECK(v >= 99.9);
        CHECK(v <= 100.0);
        CHECK(rel_err(v, 99.98999833263957) < 1e-6);
    }

    TEST_CASE("gaussian far tail does not underflow") {
        // oracle: 200.00709485204598; posterior ~ exp with scale sigma^2/(t-mu)
        const double v = posterior_median_numeric(Gaussian{100.0, 1.0}, 200.0);
        CHECK(v > 200.0);
        CHECK(v < 200.02);
        CHECK(std::abs(v - 200.00709485204598) < 5e-4);
    }

    TEST_CASE("benchmark gaussian spot checks") {
        CHECK(rel_err(posterior_median_numeric(Gaussian{78.90, 9.46}, 40.0),
                      77.73727365244613) < 1e-6);
        CHECK(rel_err(posterior_median_numeric(Gaussian{111.19, 36.72}, 70.0),
                      109.11924376959851) < 1e-6);
        CHECK(rel_err(posterior_median_numeric(Gaussian{22.06, 13.66}, 12.0),
                      22.046142533279720) < 1e-6);
        CHECK(rel_err(posterior_median_numeric(Gaussian{11.37, 5.02}, 16.0),
                      17.895272104956511) < 1e-6);
        CHECK(rel_err(posterior_median_numeric(Gaussian{11.37, 5.02}, 5.0),
                      10.343967830005772) < 1e-6);
    }

    TEST_CASE("tabulated support below t is degenerate") {
        CHECK_THROWS_AS(posterior_median_numeric(kTriangle, 5.0), DegeneratePosteriorError);
        CHECK_THROWS_AS(posterior_median_numeric(kTriangle, 4.0), DegeneratePosteriorError);
    }

    TEST_CASE("tabulated median stays inside the support") {
        const double v = posterior_median_numeric(kTriangle, 1.2);
        CHECK(v > 1.2);
        CHECK(v < 4.0);
    }

    TEST_CASE("quadrature config is validated") {
        CHECK_THROWS_AS(posterior_median_numeric(PowerLaw{1.0}, 1.0,
                                                 QuadratureConfig{512, 1e-9}),
                        DomainError);
        CHECK_THROWS_AS(posterior_median_numeric(PowerLaw{1.0}, 1.0,
                                                 QuadratureConfig{32769, 1e-2}),
                        DomainError);
        CHECK_THROWS_AS(posterior_median_numeric(PowerLaw{1.0}, 1.0,
                                                 QuadratureConfig{32769, 0.0}),
                        DomainError);
    }

    TEST_CASE("doubling the grid barely moves a gaussian median") {
        const double a =
            posterior_median_numeric(Gaussian{78.9, 9.46}, 20.0, QuadratureConfig{32769, 1e-9});
        const double b =
            posterior_median_numeric(Gaussian{78.9, 9.46}, 20.0, QuadratureConfig{65537, 1e-9});
        CHECK(rel_err(a, b) <= 1e-4);
    }
}

TEST_SUITE("batch_posterior_medians") {
    TEST_CASE("matches the per-t path on a gaussian grid") {
        std::vector<double> ts;
        for (int t = 1; t <= 31; ++t) ts.push_back(t);
        const auto batch = batch_posterior_medians(Gaussian{11.37, 5.02}, ts);
        REQUIRE(batch.size() == ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double single = posterior_median_numeric(Gaussian{11.37, 5.02}, ts[i]);
            CHECK_MESSAGE(rel_err(batch[i], single) < 1e-5, "t=", ts[i], " batch=", batch[i],
                          " single=", single);
        }
    }

    TEST_CASE("uses the analytic path for closed-form families") {
        const std::vector<double> ts{1.0, 2.0, 3.0};
        const auto medians = batch_posterior_medians(PowerLaw{1.0}, ts);
        CHECK(medians == std::vector<double>{2.0, 4.0, 6.0});
    }

    TEST_CASE("requires sorted positive ts") {
        const std::vector<double> bad{2.0, 1.0};
        CHECK_THROWS_AS(batch_posterior_medians(Gaussian{5.0, 1.0}, bad), DomainError);
    }
}

TEST_SUITE("prediction_curve") {
    TEST_CASE("gamma=1 gives the 2t baseline") {
        const std::vector<double> ts{1.0, 2.0, 3.0};
        const auto curve = prediction_curve(PowerLaw{1.0}, ts);
        REQUIRE(curve.size() == 3);
        CHECK(curve[0].t == 1.0);
        CHECK(curve[0].t_star == 2.0);
        CHECK(curve[1].t_star == 4.0);
        CHECK(curve[2].t_star == 6.0);
    }

    TEST_CASE("erlang curve hits the frozen values") {
        const std::vector<double> ts{10.0, 70.0};
        const auto curve = prediction_curve(Erlang{18.09}, ts);
        CHECK(rel_err(curve[0].t_star, 22.53903249632941) < 1e-13);
        CHECK(rel_err(curve[1].t_star, 82.53903249632941) < 1e-13);
    }

    TEST_CASE("empty grid is a precondition error") {
        const std::vector<double> empty;
        CHECK_THROWS_AS(prediction_curve(PowerLaw{1.0}, empty), DomainError);
    }

    TEST_CASE("element errors carry the offending t") {
        const std::vector<double> ts{1.5, 5.0};  // 5.0 is past the triangle support
        try {
            prediction_curve(kTriangle, ts);
            FAIL("expected a degenerate-posterior error");
        } catch (const DegeneratePosteriorError& e) {
            CHECK(std::string(e.what()).find("t=5") != std::string::npos);
        }
    }

    TEST_CASE("order follows the input") {
        const std::vector<double> ts{3.0, 1.0, 2.0};
        const auto curve = prediction_curve(Erlang{1.0}, ts);
        CHECK(curve[0].t == 3.0);
        CHECK(curve[1].t == 1.0);
        CHECK(curve[2].t == 2.0);
    }
}

TEST_SUITE("posterior invariants (sampled)") {
    TEST_CASE("dominance and monotonicity for every family") {
        const QuadratureConfig cfg;
        const std::vector<PriorSpec> priors{PowerLaw{1.3}, Erlang{7.0}, Gaussian{40.0, 12.0},
                                            Tabulated{{5.0, 50.0, 120.0}, {0.2, 1.0, 0.1}}};
        for (const auto& prior : priors) {
            double previous = 0.0;
            for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
                const double m = posterior_median(prior, t, cfg);
                CHECK(m >= t);
                CHECK(m > previous);
                previous = m;
            }
        }
    }
}
