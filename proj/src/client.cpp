#include "priorlens/client.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "priorlens/errors.hpp"
#include "priorlens/parse.hpp"

namespace priorlens {

namespace {

std::string utc_stamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw DomainError("endpoint URL must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

enum class Outcome { ok, retryable, fatal, auth };

struct Reply {
    Outcome outcome = Outcome::fatal;
    std::string text;  // content on ok, error description otherwise
};

Reply post_chat(httplib::Client& http, const std::string& path, const ClientConfig& cfg,
                const std::string& prompt) {
    nlohmann::json body = {
        {"model", cfg.model_id},
        {"temperature", cfg.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    httplib::Headers headers = {{"Authorization", "Bearer " + cfg.api_key}};
    auto res = http.Post(path, headers, body.dump(), "application/json");
    if (!res)
        return {Outcome::retryable, "connection error: " + httplib::to_string(res.error())};

    const int status = res->status;
    if (status == 401 || status == 403)
        return {Outcome::auth, "authentication rejected (HTTP " + std::to_string(status) +
                                   "): " + res->body};
    if (status == 429 || (status >= 500 && status < 600))
        return {Outcome::retryable,
                "HTTP " + std::to_string(status) + ": " + res->body};
    if (status < 200 || status >= 300)
        return {Outcome::fatal, "HTTP " + std::to_string(status) + ": " + res->body};

    try {
        const auto doc = nlohmann::json::parse(res->body);
        return {Outcome::ok, doc.at("choices").at(0).at("message").at("content")
                                 .get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        return {Outcome::fatal, std::string("malformed response body: ") + e.what()};
    }
}

// Simple requests-per-minute gate shared by the workers.
class RateGate {
public:
    explicit RateGate(int per_minute) : interval_(per_minute > 0 ? 60'000 / per_minute : 0) {}

    void acquire() {
        if (interval_.count() == 0) return;
        std::unique_lock lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        if (next_ < now) next_ = now;
        const auto slot = next_;
        next_ += interval_;
        lock.unlock();
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::milliseconds interval_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_{};
};

} // namespace

std::string api_key_from_env() {
    const char* v = std::getenv("PRIOR_LENS_API_KEY");
    return v ? v : "";
}

std::vector<ElicitationRecord> elicit(const ScenarioDef& scenario, const ClientConfig& cfg,
                                      int replicates, ElicitStats* stats) {
    validate(scenario);
    if (replicates < 1) throw DomainError("replicates must be at least 1");
    if (cfg.max_in_flight < 1) throw DomainError("max_in_flight must be at least 1");
    if (cfg.retry_max < 0) throw DomainError("retry_max must be nonnegative");
    if (!(cfg.temperature >= 0.0)) throw DomainError("temperature must be nonnegative");
    if (cfg.api_key.empty())
        throw AuthError("no credential: set PRIOR_LENS_API_KEY");

    const Endpoint ep = split_url(cfg.endpoint_url);
    const std::vector<int> grid = t_grid(scenario);

    struct Job {
        int t;
        int replicate;
    };
    std::vector<Job> jobs;
    for (int t : grid)
        for (int r = 0; r < replicates; ++r) jobs.push_back({t, r});

    std::vector<ElicitationRecord> records(jobs.size());
    std::atomic<std::size_t> next_job{0};
    std::atomic<std::size_t> retry_count{0};
    std::atomic<bool> abort{false};
    std::mutex auth_mu;
    std::string auth_message;
    RateGate gate(cfg.requests_per_minute);

    auto worker = [&](unsigned seed) {
        httplib::Client http(ep.base);
        http.set_connection_timeout(cfg.timeout);
        http.set_read_timeout(cfg.timeout);
        http.set_write_timeout(cfg.timeout);
        std::mt19937 rng(seed);

        while (!abort.load()) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job job = jobs[i];
            const std::string prompt = render_prompt(scenario, job.t);

            Reply reply;
            for (int attempt = 0;; ++attempt) {
                if (abort.load()) return;
                gate.acquire();
                reply = post_chat(http, ep.path, cfg, prompt);
                if (reply.outcome == Outcome::auth) {
                    std::lock_guard lock(auth_mu);
                    auth_message = reply.text;
                    abort.store(true);
                    return;
                }
                if (reply.outcome != Outcome::retryable || attempt >= cfg.retry_max) break;
                retry_count.fetch_add(1);
                const double scale = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
                const auto delay = std::chrono::duration_cast<std::chrono::milliseconds>(
                    cfg.retry_base_delay * std::ldexp(scale, attempt));
                std::this_thread::sleep_for(delay);
            }

            ElicitationRecord rec;
            rec.scenario_id = scenario.id;
            rec.t = job.t;
            rec.replicate = job.replicate;
            rec.model_id = cfg.model_id;
            rec.raw_response = reply.text;
            if (reply.outcome == Outcome::ok) {
                rec.parsed_value = parse_response(reply.text, scenario.answer_marker);
                rec.valid = rec.parsed_value && std::isfinite(*rec.parsed_value) &&
                            *rec.parsed_value > 0.0;
                if (!rec.valid) rec.parsed_value.reset();
            }
            rec.timestamp = utc_stamp();
            records[i] = std::move(rec);
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), jobs.size());
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
        pool.emplace_back(worker, static_cast<unsigned>(0x9e3779b9u + w));
    for (auto& th : pool) th.join();

    if (abort.load()) throw AuthError(auth_message.empty() ? "authentication failed"
                                                           : auth_message);

    if (stats) {
        stats->total = records.size();
        stats->retries = retry_count.load();
        stats->valid = 0;
        for (const auto& r : records)
            if (r.valid) ++stats->valid;
        stats->invalid = stats->total - stats->valid;
    }
    return records;  // jobs were generated in (t, replicate) order
}

} // namespace priorlens
