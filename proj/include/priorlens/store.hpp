#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "priorlens/client.hpp"
#include "priorlens/fit.hpp"

namespace priorlens {

struct RunManifest {
    std::string run_id;
    std::string created_at;
    std::string scenario_id;
    std::string model_id;
    double temperature = 0.0;
    int t_min = 0;
    int t_max = 0;
    int t_step = 1;
    int replicates = 1;
    std::string tool_version;
    std::string config_hash;
};

struct ReadStats {
    std::size_t rows = 0;
    std::size_t used = 0;
    std::size_t rejected = 0;
};

// Exact header of a records CSV.
inline constexpr std::string_view kRecordsHeader =
    "scenario,t,replicate,raw_response,parsed_value,valid,model_id,timestamp";

/// Writes `<run_id>.records.csv` and `<run_id>.manifest.json` under `dir`.
/// Both writes are atomic (temp file + rename); a failure leaves no file at
/// the target path. Returns the records CSV path.
std::filesystem::path write_records(const RunManifest& manifest,
                                    std::span<const ElicitationRecord> records,
                                    const std::filesystem::path& dir);

/// Just the records CSV, to an explicit path.
void write_records_csv(std::span<const ElicitationRecord> records,
                       const std::filesystem::path& file);

std::vector<ElicitationRecord> read_records(const std::filesystem::path& file);

/// Valid rows as (t, parsed_value) pairs, replicates collapsed per `rule`,
/// sorted by t. Invalid rows are skipped and counted in `stats`.
std::vector<PredictionPair> read_pairs(const std::filesystem::path& file, Aggregation rule,
                                       ReadStats* stats = nullptr);

/// JSON array of fit results, numbers at 9 significant digits, deterministic
/// key order; re-serialization of a parsed file is byte-identical.
void write_fit(std::span<const FitResult> results, const std::filesystem::path& file);

std::vector<FitResult> read_fit(const std::filesystem::path& file);

std::string make_run_id();                              // random v4 UUID
std::string config_hash_hex(std::string_view canonical); // FNV-1a 64 digest
std::string utc_now_iso8601();

// Shortest decimal that round-trips the double (CSV float format).
std::string format_double(double v);

} // namespace priorlens
