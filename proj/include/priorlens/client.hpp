#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "priorlens/scenario.hpp"

namespace priorlens {

struct ClientConfig {
    std::string endpoint_url;  // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model_id;
    std::string api_key;       // normally api_key_from_env()
    double temperature = 0.0;
    int max_in_flight = 4;
    int retry_max = 5;
    std::chrono::milliseconds retry_base_delay{1000};
    std::chrono::milliseconds timeout{60000};
    int requests_per_minute = 0;  // 0 disables the rate gate
};

struct ElicitationRecord {
    std::string scenario_id;
    int t = 0;
    int replicate = 0;
    std::string raw_response;
    std::optional<double> parsed_value;
    bool valid = false;  // parsed_value present, finite, and > 0
    std::string model_id;
    std::string timestamp;  // ISO-8601 UTC
};

struct ElicitStats {
    std::size_t total = 0;
    std::size_t valid = 0;
    std::size_t invalid = 0;
    std::size_t retries = 0;
};

/// PRIOR_LENS_API_KEY, or empty when unset.
std::string api_key_from_env();

/// Sweeps the scenario grid against a chat-completion endpoint, `replicates`
/// queries per t, at most max_in_flight in parallel. Returns one record per
/// (t, replicate), sorted by (t, replicate) regardless of completion order.
/// Transient failures (429, 5xx, timeouts) are retried with exponential
/// backoff; exhausted retries and other 4xx produce invalid records carrying
/// the error text. Authentication failures abort the whole run.
std::vector<ElicitationRecord> elicit(const ScenarioDef& scenario, const ClientConfig& cfg,
                                      int replicates, ElicitStats* stats = nullptr);

} // namespace priorlens
