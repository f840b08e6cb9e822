#include "priorlens/store.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

namespace priorlens {

namespace fs = std::filesystem;

namespace {

std::string csv_quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

// RFC-4180 reader; quoted fields may span lines.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_open = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].empty();
        if (table.header.empty())
            table.header = std::move(row);
        else if (!blank)
            table.rows.push_back(std::move(row));
        row.clear();
        row_open = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        row_open = true;
        switch (c) {
            case '"': quoted = true; break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_row(); break;
            default: field += c;
        }
    }
    if (row_open || !field.empty() || !row.empty()) end_row();
    return table;
}

void atomic_write(const fs::path& target, const std::string& content) {
    const fs::path dir = target.parent_path().empty() ? "." : target.parent_path();
    fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw IoError("cannot publish " + target.string() + ": " + ec.message());
    }
}

std::string record_line(const ElicitationRecord& r) {
    std::string line = csv_quote(r.scenario_id);
    line += ',';
    line += std::to_string(r.t);
    line += ',';
    line += std::to_string(r.replicate);
    line += ',';
    line += csv_quote(r.raw_response);
    line += ',';
    if (r.parsed_value) line += format_double(*r.parsed_value);
    line += ',';
    line += r.valid ? "true" : "false";
    line += ',';
    line += csv_quote(r.model_id);
    line += ',';
    line += csv_quote(r.timestamp);
    line += '\n';
    return line;
}

std::string records_csv_text(std::span<const ElicitationRecord> records) {
    std::string text(kRecordsHeader);
    text += '\n';
    for (const auto& r : records) text += record_line(r);
    return text;
}

std::vector<std::string> header_columns() {
    std::vector<std::string> cols;
    std::string h(kRecordsHeader);
    std::size_t start = 0;
    for (std::size_t i = 0; i <= h.size(); ++i)
        if (i == h.size() || h[i] == ',') {
            cols.push_back(h.substr(start, i - start));
            start = i + 1;
        }
    return cols;
}

// Names the first bad column on mismatch.
void check_records_header(const CsvTable& table) {
    const std::vector<std::string> expected = header_columns();
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i >= table.header.size() || table.header[i] != expected[i])
            throw FormatError("records header mismatch at column " + std::to_string(i + 1) +
                              ": expected '" + expected[i] + "', got '" +
                              (i < table.header.size() ? table.header[i] : "") + "'");
    }
    if (table.header.size() != expected.size())
        throw FormatError("records header has " + std::to_string(table.header.size()) +
                          " columns, expected " + std::to_string(expected.size()));
}

std::optional<double> parse_field_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string nine_digits(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void append_params_json(std::string& out, const PriorSpec& params) {
    if (const auto* pl = std::get_if<PowerLaw>(&params)) {
        out += "{\"gamma\": " + nine_digits(pl->gamma) + "}";
    } else if (const auto* er = std::get_if<Erlang>(&params)) {
        out += "{\"beta\": " + nine_digits(er->beta) + "}";
    } else if (const auto* g = std::get_if<Gaussian>(&params)) {
        out += "{\"mu\": " + nine_digits(g->mu) + ", \"sigma\": " + nine_digits(g->sigma) + "}";
    } else {
        throw DomainError("tabulated priors have no fit-result serialization");
    }
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::filesystem::path write_records(const RunManifest& manifest,
                                    std::span<const ElicitationRecord> records,
                                    const fs::path& dir) {
    if (records.empty()) throw EmptyDataError("no records to write");
    if (manifest.run_id.empty()) throw DomainError("manifest run_id must be nonempty");
    std::error_code ec;
    fs::create_directories(dir, ec);

    nlohmann::ordered_json m;
    m["run_id"] = manifest.run_id;
    m["created_at"] = manifest.created_at;
    m["scenario_id"] = manifest.scenario_id;
    m["model_id"] = manifest.model_id;
    m["temperature"] = manifest.temperature;
    m["t_grid"] = {{"t_min", manifest.t_min},
                   {"t_max", manifest.t_max},
                   {"t_step", manifest.t_step}};
    m["replicates"] = manifest.replicates;
    m["tool_version"] = manifest.tool_version;
    m["config_hash"] = manifest.config_hash;

    const fs::path csv_path = dir / (manifest.run_id + ".records.csv");
    const fs::path manifest_path = dir / (manifest.run_id + ".manifest.json");
    atomic_write(manifest_path, m.dump(2) + "\n");
    atomic_write(csv_path, records_csv_text(records));
    return csv_path;
}

void write_records_csv(std::span<const ElicitationRecord> records, const fs::path& file) {
    if (records.empty()) throw EmptyDataError("no records to write");
    atomic_write(file, records_csv_text(records));
}

std::vector<ElicitationRecord> read_records(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const CsvTable table = parse_csv(buf.str());
    check_records_header(table);

    std::vector<ElicitationRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != 8)
            throw FormatError("records row has " + std::to_string(row.size()) +
                              " fields, expected 8");
        ElicitationRecord r;
        r.scenario_id = row[0];
        r.t = static_cast<int>(std::strtol(row[1].c_str(), nullptr, 10));
        r.replicate = static_cast<int>(std::strtol(row[2].c_str(), nullptr, 10));
        r.raw_response = row[3];
        r.parsed_value = parse_field_double(row[4]);
        r.valid = row[5] == "true";
        r.model_id = row[6];
        r.timestamp = row[7];
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<PredictionPair> read_pairs(const fs::path& file, Aggregation rule,
                                       ReadStats* stats) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const CsvTable table = parse_csv(buf.str());
    // Header errors are fatal; bad rows are only counted.
    check_records_header(table);

    ReadStats local;
    std::vector<PredictionPair> pairs;
    for (const auto& row : table.rows) {
        ++local.rows;
        if (row.size() != 8) {
            ++local.rejected;
            continue;
        }
        const auto t = parse_field_double(row[1]);
        const auto value = parse_field_double(row[4]);
        const bool valid_flag = row[5] == "true";
        if (!valid_flag || !t || !value || !std::isfinite(*t) || *t <= 0.0 ||
            !std::isfinite(*value) || *value <= 0.0) {
            ++local.rejected;
            continue;
        }
        pairs.push_back({*t, *value});
        ++local.used;
    }
    if (stats) *stats = local;
    if (pairs.empty()) throw EmptyDataError("no valid rows in " + file.string());
    return collapse_replicates(std::move(pairs), rule);
}

void write_fit(std::span<const FitResult> results, const fs::path& file) {
    if (results.empty()) throw EmptyDataError("no fit results to write");
    std::string out = "[\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const FitResult& r = results[i];
        out += "  {\n";
        out += "    \"family\": \"" + std::string(family_name(r.family)) + "\",\n";
        out += "    \"params\": ";
        append_params_json(out, r.params);
        out += ",\n";
        out += "    \"mse\": " + nine_digits(r.mse) + ",\n";
        out += "    \"n\": " + std::to_string(r.n) + ",\n";
        out += std::string("    \"boundary_flag\": ") + (r.boundary_flag ? "true" : "false") +
               "\n";
        out += (i + 1 < results.size()) ? "  },\n" : "  }\n";
    }
    out += "]\n";
    atomic_write(file, out);
}

std::vector<FitResult> read_fit(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("fit file " + file.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw FormatError("fit file must hold a JSON array");
    std::vector<FitResult> results;
    for (const auto& item : doc) {
        try {
            FitResult r;
            r.family = family_from_name(item.at("family").get<std::string>());
            const auto& params = item.at("params");
            switch (r.family) {
                case Family::power_law:
                    r.params = PowerLaw{params.at("gamma").get<double>()};
                    break;
                case Family::erlang:
                    r.params = Erlang{params.at("beta").get<double>()};
                    break;
                case Family::gaussian:
                    r.params = Gaussian{params.at("mu").get<double>(),
                                        params.at("sigma").get<double>()};
                    break;
            }
            r.mse = item.at("mse").get<double>();
            r.n = item.at("n").get<std::size_t>();
            r.boundary_flag = item.at("boundary_flag").get<bool>();
            results.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("fit file " + file.string() + ": " + e.what());
        }
    }
    return results;
}

std::string make_run_id() {
    std::random_device rd;
    std::mt19937_64 rng((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                        static_cast<std::uint64_t>(
                            std::chrono::steady_clock::now().time_since_epoch().count()));
    std::uniform_int_distribution<int> nibble(0, 15);
    static const char* hex = "0123456789abcdef";
    std::string id = "xxxxxxxx-xxxx-4xxx-yxxx-xxxxxxxxxxxx";
    for (char& c : id) {
        if (c == 'x') c = hex[nibble(rng)];
        else if (c == 'y') c = hex[8 + (nibble(rng) & 3)];
    }
    return id;
}

std::string config_hash_hex(std::string_view canonical) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_now_iso8601() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

} // namespace priorlens
