#include <doctest.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "priorlens/client.hpp"
#include "priorlens/errors.hpp"

using namespace priorlens;

namespace {

// In-process scripted endpoint with the production wire format.
class MockEndpoint {
public:
    using Handler = std::function<void(const std::string& content, int attempt,
                                       httplib::Response& res)>;

    explicit MockEndpoint(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            last_auth_ = req.get_header_value("Authorization");
            ++hits_;
            std::string content;
            try {
                const auto doc = nlohmann::json::parse(req.body);
                content = doc.at("messages").at(0).at("content").get<std::string>();
            } catch (...) {
                res.status = 400;
                return;
            }
            int attempt;
            {
                std::lock_guard lock(mu_);
                attempt = attempts_[content]++;
            }
            handler_(content, attempt, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string url() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }
    int hits() const { return hits_.load(); }
    std::string last_auth() const { return last_auth_; }

    static void reply(httplib::Response& res, const std::string& content) {
        nlohmann::json doc = {{"choices", nlohmann::json::array({{{"message",
                                    {{"role", "assistant"}, {"content", content}}}}})}};
        res.status = 200;
        res.set_content(doc.dump(), "application/json");
    }

    static long first_int(const std::string& s) {
        std::size_t i = 0;
        while (i < s.size() && !isdigit(static_cast<unsigned char>(s[i]))) ++i;
        long v = 0;
        while (i < s.size() && isdigit(static_cast<unsigned char>(s[i])))
            v = v * 10 + (s[i++] - '0');
        return v;
    }

private:
    httplib::Server server_;
    Handler handler_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::string last_auth_;
    std::mutex mu_;
    std::map<std::string, int> attempts_;
};

ClientConfig test_config(const std::string& url) {
    ClientConfig cfg;
    cfg.endpoint_url = url;
    cfg.model_id = "mock-model";
    cfg.api_key = "test-key";
    cfg.retry_base_delay = std::chrono::milliseconds(5);
    cfg.timeout = std::chrono::milliseconds(5000);
    return cfg;
}

ScenarioDef small_scenario() {
    ScenarioDef s;
    s.id = "mini";
    s.prompt_template = "value is {t}. Answer= ";
    s.t_min = 1;
    s.t_max = 5;
    s.t_step = 1;
    s.answer_marker = "Answer=";
    s.units = "units";
    return s;
}

} // namespace

TEST_SUITE("elicit") {
    TEST_CASE("happy path: one valid record per grid point, parsed 2t") {
        MockEndpoint mock([](const std::string& content, int, httplib::Response& res) {
            MockEndpoint::reply(res, "Answer= " + std::to_string(2 * MockEndpoint::first_int(content)));
        });
        ElicitStats stats;
        const auto records = elicit(small_scenario(), test_config(mock.url()), 1, &stats);
        REQUIRE(records.size() == 5);
        CHECK(stats.valid == 5);
        CHECK(stats.invalid == 0);
        for (int i = 0; i < 5; ++i) {
            CHECK(records[i].t == i + 1);
            CHECK(records[i].valid);
            CHECK(records[i].parsed_value == 2.0 * (i + 1));
            CHECK(records[i].model_id == "mock-model");
            CHECK(records[i].scenario_id == "mini");
            CHECK(!records[i].timestamp.empty());
        }
        CHECK(mock.last_auth() == "Bearer test-key");
    }

    TEST_CASE("429 twice then success retries and succeeds") {
        MockEndpoint mock([](const std::string& content, int attempt, httplib::Response& res) {
            if (attempt < 2) {
                res.status = 429;
                res.set_content("slow down", "text/plain");
                return;
            }
            MockEndpoint::reply(res, "Answer= " + std::to_string(2 * MockEndpoint::first_int(content)));
        });
        ElicitStats stats;
        const auto records = elicit(small_scenario(), test_config(mock.url()), 1, &stats);
        CHECK(stats.valid == 5);
        CHECK(stats.retries >= 10);  // two retries per t
    }

    TEST_CASE("a proseful reply with no digits yields an invalid record, run completes") {
        MockEndpoint mock([](const std::string& content, int, httplib::Response& res) {
            if (MockEndpoint::first_int(content) == 3)
                MockEndpoint::reply(res, "I would rather not guess.");
            else
                MockEndpoint::reply(res, "Answer= " + std::to_string(2 * MockEndpoint::first_int(content)));
        });
        ElicitStats stats;
        const auto records = elicit(small_scenario(), test_config(mock.url()), 1, &stats);
        REQUIRE(records.size() == 5);
        CHECK(stats.valid == 4);
        CHECK(stats.invalid == 1);
        CHECK_FALSE(records[2].valid);
        CHECK_FALSE(records[2].parsed_value.has_value());
        CHECK(records[2].raw_response == "I would rather not guess.");
    }

    TEST_CASE("retries exhausted still yields a full record set") {
        MockEndpoint mock([](const std::string& content, int, httplib::Response& res) {
            if (MockEndpoint::first_int(content) == 2) {
                res.status = 503;
                res.set_content("down", "text/plain");
            } else {
                MockEndpoint::reply(res, "Answer= 9");
            }
        });
        auto cfg = test_config(mock.url());
        cfg.retry_max = 2;
        ElicitStats stats;
        const auto records = elicit(small_scenario(), cfg, 1, &stats);
        REQUIRE(records.size() == 5);
        CHECK(stats.invalid == 1);
        CHECK_FALSE(records[1].valid);
        CHECK(records[1].raw_response.find("503") != std::string::npos);
    }

    TEST_CASE("non-retryable 4xx is fatal for the record only") {
        MockEndpoint mock([](const std::string& content, int, httplib::Response& res) {
            if (MockEndpoint::first_int(content) == 4) {
                res.status = 404;
                res.set_content("gone", "text/plain");
            } else {
                MockEndpoint::reply(res, "Answer= 9");
            }
        });
        ElicitStats stats;
        const auto records = elicit(small_scenario(), test_config(mock.url()), 1, &stats);
        CHECK(records.size() == 5);
        CHECK(stats.invalid == 1);
        CHECK(records[3].raw_response.find("404") != std::string::npos);
    }

    TEST_CASE("authentication failure aborts the run") {
        MockEndpoint mock([](const std::string&, int, httplib::Response& res) {
            res.status = 401;
            res.set_content("who are you", "text/plain");
        });
        CHECK_THROWS_AS(elicit(small_scenario(), test_config(mock.url()), 1), AuthError);
    }

    TEST_CASE("missing credential fails before any request") {
        MockEndpoint mock([](const std::string&, int, httplib::Response& res) {
            MockEndpoint::reply(res, "Answer= 9");
        });
        auto cfg = test_config(mock.url());
        cfg.api_key.clear();
        CHECK_THROWS_AS(elicit(small_scenario(), cfg, 1), AuthError);
        CHECK(mock.hits() == 0);
    }

    TEST_CASE("replicates multiply the record count and order deterministically") {
        MockEndpoint mock([](const std::string& content, int, httplib::Response& res) {
            MockEndpoint::reply(res, "Answer= " + std::to_string(2 * MockEndpoint::first_int(content)));
        });
        auto cfg = test_config(mock.url());
        cfg.max_in_flight = 3;
        const auto records = elicit(small_scenario(), cfg, 3);
        REQUIRE(records.size() == 15);
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(records[i].t == static_cast<int>(i / 3) + 1);
            CHECK(records[i].replicate == static_cast<int>(i % 3));
        }
    }

    TEST_CASE("request timeouts take the retry path") {
        MockEndpoint mock([](const std::string& content, int attempt, httplib::Response& res) {
            if (MockEndpoint::first_int(content) == 2 && attempt == 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(700));
            MockEndpoint::reply(res, "Answer= 9");
        });
        auto cfg = test_config(mock.url());
        cfg.timeout = std::chrono::milliseconds(200);
        cfg.retry_max = 3;
        ElicitStats stats;
        const auto records = elicit(small_scenario(), cfg, 1, &stats);
        REQUIRE(records.size() == 5);
        CHECK(stats.retries >= 1);
        CHECK(stats.valid == 5);  // the retry of t=2 succeeds
    }

    TEST_CASE("the requests-per-minute gate paces dispatch") {
        MockEndpoint mock([](const std::string&, int, httplib::Response& res) {
            MockEndpoint::reply(res, "Answer= 9");
        });
        auto cfg = test_config(mock.url());
        cfg.requests_per_minute = 1200;  // one slot every 50 ms
        const auto started = std::chrono::steady_clock::now();
        elicit(small_scenario(), cfg, 1);
        const auto elapsed = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started);
        CHECK(elapsed.count() >= 150.0);  // 5 requests need at least 4 slots
    }

    TEST_CASE("malformed reply body yields an invalid record") {
        MockEndpoint mock([](const std::string&, int, httplib::Response& res) {
            res.status = 200;
            res.set_content("not json at all", "text/plain");
        });
        ElicitStats stats;
        const auto records = elicit(small_scenario(), test_config(mock.url()), 1, &stats);
        CHECK(stats.valid == 0);
        CHECK(stats.invalid == 5);
        CHECK(records[0].raw_response.find("malformed") != std::string::npos);
    }
}
