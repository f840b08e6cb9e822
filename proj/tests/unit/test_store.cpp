#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "priorlens/store.hpp"

using namespace priorlens;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("priorlens_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ElicitationRecord make_record(int t, double value) {
    ElicitationRecord r;
    r.scenario_id = "cakes";
    r.t = t;
    r.replicate = 0;
    r.raw_response = "Predicted_number_of_minutes= " + format_double(value);
    r.parsed_value = value;
    r.valid = true;
    r.model_id = "test-model";
    r.timestamp = "2026-08-11T00:00:00Z";
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunManifest make_manifest() {
    RunManifest m;
    m.run_id = "00000000-0000-4000-8000-000000000001";
    m.created_at = "2026-08-11T00:00:00Z";
    m.scenario_id = "cakes";
    m.model_id = "test-model";
    m.temperature = 0.0;
    m.t_min = 10;
    m.t_max = 70;
    m.t_step = 1;
    m.replicates = 1;
    m.tool_version = "0.1.0";
    m.config_hash = config_hash_hex("test");
    return m;
}

} // namespace

TEST_SUITE("records csv") {
    TEST_CASE("61 records make a 62-line file with the exact header") {
        TempDir dir;
        std::vector<ElicitationRecord> records;
        for (int t = 10; t <= 70; ++t) records.push_back(make_record(t, 2.0 * t));
        const auto csv = write_records(make_manifest(), records, dir.path);

        const std::string text = slurp(csv);
        CHECK(text.rfind(std::string(kRecordsHeader) + "\n", 0) == 0);
        std::size_t lines = 0;
        for (char c : text)
            if (c == '\n') ++lines;
        CHECK(lines == 62);
        CHECK(fs::exists(dir.path / "00000000-0000-4000-8000-000000000001.manifest.json"));
    }

    TEST_CASE("quoted fields round-trip commas, quotes, and newlines") {
        TempDir dir;
        auto rec = make_record(10, 20.0);
        rec.raw_response = "I think 20, maybe \"25\"\nhard to say";
        rec.model_id = "model,with,commas";
        const fs::path file = dir.path / "quoted.csv";
        write_records_csv({&rec, 1}, file);

        const auto back = read_records(file);
        REQUIRE(back.size() == 1);
        CHECK(back[0].raw_response == rec.raw_response);
        CHECK(back[0].model_id == rec.model_id);
        CHECK(back[0].t == 10);
        CHECK(back[0].parsed_value == rec.parsed_value);
    }

    TEST_CASE("round trip preserves doubles bit-exactly") {
        TempDir dir;
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> mant(0.0, 1.0);
        std::uniform_int_distribution<int> expo(-8, 8);
        std::vector<ElicitationRecord> records;
        for (int i = 0; i < 200; ++i) {
            const double v = mant(rng) * std::pow(10.0, expo(rng));
            records.push_back(make_record(10 + i % 61, v));
        }
        const fs::path file = dir.path / "roundtrip.csv";
        write_records_csv(records, file);
        const auto back = read_records(file);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            REQUIRE(back[i].parsed_value.has_value());
            CHECK(*back[i].parsed_value == *records[i].parsed_value);
            CHECK(back[i].raw_response == records[i].raw_response);
            CHECK(back[i].timestamp == records[i].timestamp);
        }
    }

    TEST_CASE("empty record set refuses to write") {
        TempDir dir;
        std::vector<ElicitationRecord> none;
        CHECK_THROWS_AS(write_records_csv(none, dir.path / "x.csv"), EmptyDataError);
    }
}

TEST_SUITE("read_pairs") {
    TEST_CASE("invalid rows are skipped with counts") {
        TempDir dir;
        std::vector<ElicitationRecord> records;
        records.push_back(make_record(10, 20.0));
        records.push_back(make_record(11, 22.0));
        records.push_back(make_record(12, 24.0));
        ElicitationRecord bad1 = make_record(13, 0.0);
        bad1.parsed_value.reset();
        bad1.valid = false;
        bad1.raw_response = "no idea";
        ElicitationRecord bad2 = make_record(14, -3.0);
        bad2.valid = false;
        records.push_back(bad1);
        records.push_back(bad2);

        const fs::path file = dir.path / "mixed.csv";
        write_records_csv(records, file);
        ReadStats stats;
        const auto pairs = read_pairs(file, Aggregation::median, &stats);
        CHECK(pairs.size() == 3);
        CHECK(stats.rows == 5);
        CHECK(stats.used == 3);
        CHECK(stats.rejected == 2);
    }

    TEST_CASE("replicates collapse by the requested rule") {
        TempDir dir;
        std::vector<ElicitationRecord> records;
        auto a = make_record(10, 40.0);
        auto b = make_record(10, 44.0);
        b.replicate = 1;
        records.push_back(a);
        records.push_back(b);
        records.push_back(make_record(11, 30.0));
        const fs::path file = dir.path / "reps.csv";
        write_records_csv(records, file);

        const auto median_pairs = read_pairs(file, Aggregation::median);
        REQUIRE(median_pairs.size() == 2);
        CHECK(median_pairs[0].t == 10.0);
        CHECK(median_pairs[0].t_star == 42.0);

        const auto raw_pairs = read_pairs(file, Aggregation::none);
        CHECK(raw_pairs.size() == 3);
    }

    TEST_CASE("bad header names the first bad column") {
        TempDir dir;
        const fs::path file = dir.path / "bad.csv";
        {
            std::ofstream out(file);
            out << "scenario;t;replicate\n";
        }
        try {
            read_pairs(file, Aggregation::median);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("column 1") != std::string::npos);
        }

        {
            std::ofstream out(file);
            out << "scenario,t,replicate,raw,parsed_value,valid,model_id,timestamp\n";
        }
        try {
            read_pairs(file, Aggregation::median);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("column 4") != std::string::npos);
            CHECK(std::string(e.what()).find("raw_response") != std::string::npos);
        }
    }

    TEST_CASE("a file with no valid rows is an empty-data error") {
        TempDir dir;
        const fs::path file = dir.path / "empty.csv";
        {
            std::ofstream out(file);
            out << kRecordsHeader << "\n";
            out << "cakes,10,0,nope,,false,m,2026-08-11T00:00:00Z\n";
        }
        CHECK_THROWS_AS(read_pairs(file, Aggregation::median), EmptyDataError);
    }
}

TEST_SUITE("fit json") {
    TEST_CASE("serialized form carries the family and parameters") {
        TempDir dir;
        FitResult r;
        r.family = Family::erlang;
        r.params = Erlang{18.09};
        r.mse = 0.000123456789;
        r.n = 61;
        r.boundary_flag = false;
        const fs::path file = dir.path / "fit.json";
        write_fit({&r, 1}, file);
        const std::string text = slurp(file);
        CHECK(text.find("\"family\": \"erlang\"") != std::string::npos);
        CHECK(text.find("\"beta\": 18.09") != std::string::npos);
        CHECK(text.find("\"n\": 61") != std::string::npos);
    }

    TEST_CASE("re-serialization is byte-identical") {
        TempDir dir;
        std::vector<FitResult> results;
        FitResult a;
        a.family = Family::power_law;
        a.params = PowerLaw{1.1999999987654321};
        a.mse = 1.23456789e-13;
        a.n = 100;
        results.push_back(a);
        FitResult b;
        b.family = Family::gaussian;
        b.params = Gaussian{78.90123456789, 9.4612345678901};
        b.mse = 345.678901234;
        b.n = 31;
        b.boundary_flag = true;
        results.push_back(b);

        const fs::path f1 = dir.path / "fit1.json";
        const fs::path f2 = dir.path / "fit2.json";
        write_fit(results, f1);
        const auto parsed = read_fit(f1);
        REQUIRE(parsed.size() == 2);
        write_fit(parsed, f2);
        CHECK(slurp(f1) == slurp(f2));
    }

    TEST_CASE("empty results refuse to write") {
        TempDir dir;
        std::vector<FitResult> none;
        CHECK_THROWS_AS(write_fit(none, dir.path / "fit.json"), EmptyDataError);
    }
}

TEST_SUITE("atomicity") {
    TEST_CASE("a failed publish leaves no target file and no temp litter") {
        TempDir dir;
        // Make the CSV target path an existing directory so the final rename
        // must fail after the temp file was fully written.
        const fs::path target = dir.path / "blocked.csv";
        fs::create_directories(target);
        auto rec = make_record(10, 20.0);
        CHECK_THROWS_AS(write_records_csv({&rec, 1}, target), IoError);
        CHECK(fs::is_directory(target));
        std::size_t entries = 0;
        for (const auto& e : fs::directory_iterator(dir.path)) {
            (void)e;
            ++entries;
        }
        CHECK(entries == 1);  // only the blocking directory itself
    }

    TEST_CASE("an unwritable directory fails cleanly") {
        auto rec = make_record(10, 20.0);
        CHECK_THROWS_AS(
            write_records_csv({&rec, 1}, fs::path("/nonexistent_dir_xyz/file.csv")), IoError);
        CHECK_FALSE(fs::exists("/nonexistent_dir_xyz/file.csv"));
    }
}

TEST_SUITE("ids and hashes") {
    TEST_CASE("run ids look like v4 uuids and differ") {
        const std::string a = make_run_id();
        const std::string b = make_run_id();
        CHECK(a.size() == 36);
        CHECK(a[14] == '4');
        CHECK(a != b);
    }

    TEST_CASE("config hash is deterministic") {
        CHECK(config_hash_hex("abc") == config_hash_hex("abc"));
        CHECK(config_hash_hex("abc") != config_hash_hex("abd"));
        CHECK(config_hash_hex("abc").size() == 16);
    }
}
