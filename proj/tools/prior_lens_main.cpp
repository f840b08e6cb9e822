// prior-lens: posterior-median predictions under everyday priors, synthetic
// data generation, black-box predictor elicitation, and prior recovery by
// MSE fitting. Exit codes: 0 success, 2 usage, 3 data, 4 auth/network-fatal.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "priorlens/client.hpp"
#include "priorlens/errors.hpp"
#include "priorlens/fit.hpp"
#include "priorlens/parse.hpp"
#include "priorlens/prior.hpp"
#include "priorlens/report.hpp"
#include "priorlens/scenario.hpp"
#include "priorlens/store.hpp"
#include "priorlens/version.hpp"

namespace pl = priorlens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAuth = 4;

struct FamilyFlags {
    std::string family;
    double gamma = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    bool gamma_set = false, beta_set = false, mu_set = false, sigma_set = false;
};

void add_family_flags(CLI::App* cmd, FamilyFlags& f) {
    cmd->add_option("--family", f.family, "prior family: powerlaw, erlang, or gaussian")
        ->required();
    cmd->add_option("--gamma", f.gamma, "power-law exponent")->each([&](const std::string&) {
        f.gamma_set = true;
    });
    cmd->add_option("--beta", f.beta, "Erlang scale")->each([&](const std::string&) {
        f.beta_set = true;
    });
    cmd->add_option("--mu", f.mu, "Gaussian mean")->each([&](const std::string&) {
        f.mu_set = true;
    });
    cmd->add_option("--sigma", f.sigma, "Gaussian standard deviation")
        ->each([&](const std::string&) { f.sigma_set = true; });
}

pl::PriorSpec prior_from_flags(const FamilyFlags& f) {
    const pl::Family family = pl::family_from_name(f.family);
    auto reject_extra = [&](bool bad, const char* flag) {
        if (bad)
            throw pl::DomainError(std::string(flag) + " does not apply to family '" +
                                  f.family + "'");
    };
    switch (family) {
        case pl::Family::power_law:
            if (!f.gamma_set) throw pl::DomainError("--family powerlaw requires --gamma");
            reject_extra(f.beta_set, "--beta");
            reject_extra(f.mu_set || f.sigma_set, "--mu/--sigma");
            return pl::PowerLaw{f.gamma};
        case pl::Family::erlang:
            if (!f.beta_set) throw pl::DomainError("--family erlang requires --beta");
            reject_extra(f.gamma_set, "--gamma");
            reject_extra(f.mu_set || f.sigma_set, "--mu/--sigma");
            return pl::Erlang{f.beta};
        case pl::Family::gaussian:
            if (!f.mu_set || !f.sigma_set)
                throw pl::DomainError("--family gaussian requires --mu and --sigma");
            reject_extra(f.gamma_set, "--gamma");
            reject_extra(f.beta_set, "--beta");
            return pl::Gaussian{f.mu, f.sigma};
    }
    throw pl::DomainError("unknown family");
}

struct QuadFlags {
    std::size_t grid_points = pl::QuadratureConfig{}.grid_points;
    double tail_eps = pl::QuadratureConfig{}.tail_mass_epsilon;
    pl::QuadratureConfig config() const { return {grid_points, tail_eps}; }
};

void add_quad_flags(CLI::App* cmd, QuadFlags& q) {
    cmd->add_option("--grid-points", q.grid_points, "quadrature grid points (>= 1025)");
    cmd->add_option("--tail-eps", q.tail_eps, "truncated posterior tail mass");
}

int run_predict(const FamilyFlags& family, const QuadFlags& quad, double t) {
    const pl::PriorSpec prior = prior_from_flags(family);
    const double median = pl::posterior_median(prior, t, quad.config());
    std::printf("%.6g\n", median);
    return kExitOk;
}

int run_simulate(const FamilyFlags& family, const QuadFlags& quad, int t_min, int t_max,
                 int step, double noise_sd, std::uint64_t seed, const std::string& out,
                 const std::string& scenario_id) {
    if (t_min <= 0 || t_max < t_min || step < 1)
        throw pl::DomainError("need 0 < t-min <= t-max and step >= 1");
    if (!(noise_sd >= 0.0)) throw pl::DomainError("--noise-sd must be nonnegative");

    const pl::PriorSpec prior = prior_from_flags(family);
    std::vector<double> grid;
    for (int t = t_min; t <= t_max; t += step) grid.push_back(t);
    const auto curve = pl::prediction_curve(prior, grid, quad.config());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);

    std::vector<pl::ElicitationRecord> records;
    records.reserve(curve.size());
    for (const auto& point : curve) {
        pl::ElicitationRecord rec;
        rec.scenario_id = scenario_id;
        rec.t = static_cast<int>(point.t);
        rec.replicate = 0;
        double value = point.t_star;
        if (noise_sd > 0.0) value += noise(rng);
        rec.raw_response = pl::format_double(value);
        if (std::isfinite(value) && value > 0.0) {
            rec.parsed_value = value;
            rec.valid = true;
        }
        rec.model_id = "simulator";
        rec.timestamp = "1970-01-01T00:00:00Z";
        records.push_back(std::move(rec));
    }

    if (out == "-") {
        std::cout << pl::kRecordsHeader << "\n";
        for (const auto& r : records) {
            std::cout << r.scenario_id << ',' << r.t << ',' << r.replicate << ','
                      << r.raw_response << ','
                      << (r.parsed_value ? pl::format_double(*r.parsed_value) : "") << ','
                      << (r.valid ? "true" : "false") << ',' << r.model_id << ','
                      << r.timestamp << "\n";
        }
    } else {
        pl::write_records_csv(records, out);
        std::cerr << "wrote " << records.size() << " records to " << out << "\n";
    }
    return kExitOk;
}

int run_fit(const std::string& input, std::string out, const std::string& aggregation,
            const QuadFlags& quad, double simplex_tol, std::size_t max_evals,
            std::size_t objective_grid, bool parallel, const std::string& report_dir) {
    pl::FitOptions opts;
    opts.replicate_aggregation = pl::aggregation_from_name(aggregation);
    opts.simplex_tolerance = simplex_tol;
    opts.max_evaluations = max_evals;
    opts.objective_grid_points = objective_grid;
    opts.parallel_starts = parallel;

    pl::ReadStats stats;
    const auto pairs = pl::read_pairs(input, opts.replicate_aggregation, &stats);

    pl::SelectDiagnostics diag;
    const auto ranked = pl::select_model(pairs, opts, quad.config(), &diag);
    if (ranked.empty()) {
        std::cerr << "error: every family failed to fit\n";
        for (const auto& [family, message] : diag.failures)
            std::cerr << "  " << pl::family_name(family) << ": " << message << "\n";
        return kExitData;
    }

    if (out.empty()) {
        out = input;
        const auto dot = out.rfind(".csv");
        if (dot != std::string::npos && dot == out.size() - 4) out.resize(dot);
        out += ".fit.json";
    }
    pl::write_fit(ranked, out);

    std::cerr << "rows " << stats.rows << ", used " << stats.used << ", rejected "
              << stats.rejected << "\n";
    for (const auto& [family, message] : diag.failures)
        std::cerr << "skipped " << pl::family_name(family) << ": " << message << "\n";
    const auto& best = ranked.front();
    std::cout << "winner: " << pl::family_name(best.family);
    if (const auto* pl_params = std::get_if<pl::PowerLaw>(&best.params))
        std::cout << " gamma=" << pl::format_double(pl_params->gamma);
    else if (const auto* er = std::get_if<pl::Erlang>(&best.params))
        std::cout << " beta=" << pl::format_double(er->beta);
    else if (const auto* g = std::get_if<pl::Gaussian>(&best.params))
        std::cout << " mu=" << pl::format_double(g->mu)
                  << " sigma=" << pl::format_double(g->sigma);
    std::cout << " mse=" << pl::format_double(best.mse) << " n=" << best.n
              << (best.boundary_flag ? " (boundary)" : "") << "\n";
    std::cerr << "wrote " << out << "\n";

    if (!report_dir.empty()) {
        std::filesystem::create_directories(report_dir);
        std::string scenario = "data";
        const auto records = pl::read_records(input);
        if (!records.empty()) scenario = records.front().scenario_id;
        const auto report = pl::build_report(pairs, ranked, quad.config(), scenario);
        const std::filesystem::path dir(report_dir);
        pl::write_report_csv(report, dir / (scenario + ".curve.csv"),
                             dir / (scenario + ".prior.csv"));
        pl::write_report_svg(report, dir / (scenario + ".svg"));
        std::cerr << "report written under " << report_dir << "\n";
    }
    return kExitOk;
}

int run_elicit(const std::string& scenario_id, const std::string& scenarios_file,
               pl::ClientConfig cfg, int replicates, const std::string& out_dir) {
    cfg.api_key = pl::api_key_from_env();
    if (cfg.api_key.empty()) {
        std::cerr << "error: PRIOR_LENS_API_KEY is not set\n";
        return kExitAuth;
    }

    std::vector<pl::ScenarioDef> scenarios =
        scenarios_file.empty() ? pl::builtin_scenarios() : pl::load_scenarios(scenarios_file);
    const pl::ScenarioDef* scenario = pl::find_scenario(scenarios, scenario_id);
    if (!scenario) {
        std::cerr << "error: unknown scenario '" << scenario_id << "'\n";
        return kExitUsage;
    }
    if (scenario->non_canonical)
        std::cerr << "note: scenario '" << scenario->id
                  << "' ships a non-canonical prompt text\n";

    pl::ElicitStats stats;
    const auto records = pl::elicit(*scenario, cfg, replicates, &stats);

    pl::RunManifest manifest;
    manifest.run_id = pl::make_run_id();
    manifest.created_at = pl::utc_now_iso8601();
    manifest.scenario_id = scenario->id;
    manifest.model_id = cfg.model_id;
    manifest.temperature = cfg.temperature;
    manifest.t_min = scenario->t_min;
    manifest.t_max = scenario->t_max;
    manifest.t_step = scenario->t_step;
    manifest.replicates = replicates;
    manifest.tool_version = pl::kToolVersion;
    manifest.config_hash = pl::config_hash_hex(
        cfg.endpoint_url + "|" + cfg.model_id + "|" + pl::format_double(cfg.temperature) +
        "|" + scenario->id + "|" + std::to_string(replicates));

    const auto csv_path = pl::write_records(manifest, records, out_dir);
    std::cout << "run " << manifest.run_id << ": " << stats.total << " records, "
              << stats.valid << " valid, " << stats.invalid << " invalid, " << stats.retries
              << " retries\n";
    std::cout << "records: " << csv_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian prediction functions and implicit-prior recovery"};
    app.set_config("--config", "", "read flag defaults from a config file");
    app.set_version_flag("--version", std::string(pl::kToolVersion));
    app.require_subcommand(1);

    // predict
    auto* predict = app.add_subcommand("predict", "print the posterior-median prediction t*");
    FamilyFlags predict_family;
    QuadFlags predict_quad;
    double predict_t = 0.0;
    add_family_flags(predict, predict_family);
    add_quad_flags(predict, predict_quad);
    predict->add_option("--t", predict_t, "observed partial value")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "emit a synthetic records CSV");
    FamilyFlags sim_family;
    QuadFlags sim_quad;
    int sim_tmin = 1, sim_tmax = 1, sim_step = 1;
    double sim_noise = 0.0;
    std::uint64_t sim_seed = 0;
    std::string sim_out = "-";
    std::string sim_scenario = "synthetic";
    add_family_flags(simulate, sim_family);
    add_quad_flags(simulate, sim_quad);
    simulate->add_option("--t-min", sim_tmin, "grid start")->required();
    simulate->add_option("--t-max", sim_tmax, "grid end")->required();
    simulate->add_option("--step", sim_step, "grid step");
    simulate->add_option("--noise-sd", sim_noise, "Gaussian noise sd added to t*");
    simulate->add_option("--seed", sim_seed, "noise RNG seed");
    simulate->add_option("--out", sim_out, "output CSV path, '-' for stdout");
    simulate->add_option("--scenario-id", sim_scenario, "scenario label for the CSV");

    // fit
    auto* fit = app.add_subcommand("fit", "recover the implicit prior from a records CSV");
    QuadFlags fit_quad;
    std::string fit_input, fit_out, fit_report;
    std::string fit_aggregation = "median";
    double fit_tol = pl::FitOptions{}.simplex_tolerance;
    std::size_t fit_evals = pl::FitOptions{}.max_evaluations;
    std::size_t fit_objective_grid = pl::FitOptions{}.objective_grid_points;
    bool fit_parallel = false;
    fit->add_option("--input", fit_input, "records CSV path")->required();
    fit->add_option("--out", fit_out, "fit JSON path (default <input>.fit.json)");
    fit->add_option("--aggregation", fit_aggregation, "replicate rule: median, mean, none");
    add_quad_flags(fit, fit_quad);
    fit->add_option("--simplex-tol", fit_tol, "simplex convergence tolerance");
    fit->add_option("--max-evals", fit_evals, "objective evaluations per simplex start");
    fit->add_option("--objective-grid-points", fit_objective_grid,
                    "quadrature resolution during optimization");
    fit->add_flag("--parallel", fit_parallel, "run simplex starts concurrently");
    fit->add_option("--report", fit_report, "also write report tables and SVG to this dir");

    // elicit
    auto* elicit = app.add_subcommand("elicit", "sweep a scenario against a chat endpoint");
    pl::ClientConfig client;
    int elicit_replicates = 1;
    std::string elicit_scenario, elicit_scenarios_file, elicit_out_dir = ".";
    long retry_base_ms = 1000, timeout_ms = 60000;
    elicit->add_option("--scenario", elicit_scenario, "scenario id")->required();
    elicit->add_option("--endpoint", client.endpoint_url, "chat-completion URL")->required();
    elicit->add_option("--model", client.model_id, "model id")->required();
    elicit->add_option("--temperature", client.temperature, "sampling temperature");
    elicit->add_option("--replicates", elicit_replicates, "queries per t");
    elicit->add_option("--max-in-flight", client.max_in_flight, "concurrent requests");
    elicit->add_option("--retry-max", client.retry_max, "retries per request");
    elicit->add_option("--retry-base-ms", retry_base_ms, "base backoff delay (ms)");
    elicit->add_option("--timeout-ms", timeout_ms, "per-request timeout (ms)");
    elicit->add_option("--rpm", client.requests_per_minute, "requests-per-minute cap");
    elicit->add_option("--out-dir", elicit_out_dir, "directory for records and manifest");
    elicit->add_option("--scenarios", elicit_scenarios_file, "scenario definitions JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (predict->parsed()) return run_predict(predict_family, predict_quad, predict_t);
        if (simulate->parsed())
            return run_simulate(sim_family, sim_quad, sim_tmin, sim_tmax, sim_step, sim_noise,
                                sim_seed, sim_out, sim_scenario);
        if (fit->parsed())
            return run_fit(fit_input, fit_out, fit_aggregation, fit_quad, fit_tol, fit_evals,
                           fit_objective_grid, fit_parallel, fit_report);
        if (elicit->parsed()) {
            client.retry_base_delay = std::chrono::milliseconds(retry_base_ms);
            client.timeout = std::chrono::milliseconds(timeout_ms);
            return run_elicit(elicit_scenario, elicit_scenarios_file, client,
                              elicit_replicates, elicit_out_dir);
        }
    } catch (const pl::AuthError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAuth;
    } catch (const pl::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pl::RangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pl::UnsupportedFamilyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pl::Error& e) {
        // data-shaped failures: empty/insufficient data, format, IO, degenerate
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
