// Scripted chat-completion endpoint for testing the elicitation pipeline.
// Speaks the same wire format as the real client: POST JSON with
// model/temperature/messages, replies {"choices":[{"message":{"content":...}}]}.
//
// Script file (JSON):
//   reply_template   body text; {t} and {2t} substitute the first integer
//                    found in the incoming user message (default "{2t}")
//   status_prelude   HTTP statuses served for the first k attempts of each
//                    distinct prompt before the scripted reply (default [])
//   require_auth     reject requests without a bearer token with 401
//   malformed_body   reply 200 with a non-JSON body

#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <unistd.h>

namespace {

struct Script {
    std::string reply_template = "Predicted_number_of_minutes= {2t}";
    std::vector<int> status_prelude;
    bool require_auth = false;
    bool malformed_body = false;
};

Script load_script(const std::string& path) {
    Script s;
    if (path.empty()) return s;
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "cannot open script %s\n", path.c_str());
        std::exit(1);
    }
    nlohmann::json doc;
    in >> doc;
    s.reply_template = doc.value("reply_template", s.reply_template);
    s.require_auth = doc.value("require_auth", false);
    s.malformed_body = doc.value("malformed_body", false);
    if (doc.contains("status_prelude"))
        for (const auto& v : doc["status_prelude"]) s.status_prelude.push_back(v.get<int>());
    return s;
}

long first_integer(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && (text[i] < '0' || text[i] > '9')) ++i;
    if (i >= text.size()) return -1;
    long v = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9')
        v = v * 10 + (text[i++] - '0');
    return v;
}

std::string substitute(std::string body, long t) {
    auto replace_all = [&](const std::string& token, const std::string& value) {
        std::size_t at = 0;
        while ((at = body.find(token, at)) != std::string::npos) {
            body.replace(at, token.size(), value);
            at += value.size();
        }
    };
    replace_all("{2t}", std::to_string(2 * t));
    replace_all("{t}", std::to_string(t));
    return body;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scripted chat-completion mock server"};
    std::string script_path, host = "127.0.0.1", port_file, pid_file;
    int port = 0;
    app.add_option("--script", script_path, "script JSON path");
    app.add_option("--host", host, "bind host");
    app.add_option("--port", port, "bind port, 0 for ephemeral");
    app.add_option("--port-file", port_file, "write the bound port here");
    app.add_option("--pid-file", pid_file, "write the server pid here");
    CLI11_PARSE(app, argc, argv);

    const Script script = load_script(script_path);

    httplib::Server server;
    std::mutex mu;
    std::map<std::string, int> attempts;  // per distinct prompt

    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        if (script.require_auth) {
            const auto auth = req.get_header_value("Authorization");
            if (auth.rfind("Bearer ", 0) != 0 || auth.size() <= 7) {
                res.status = 401;
                res.set_content("{\"error\": \"missing bearer token\"}", "application/json");
                return;
            }
        }
        std::string content;
        try {
            const auto doc = nlohmann::json::parse(req.body);
            content = doc.at("messages").at(0).at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            res.set_content("{\"error\": \"bad request body\"}", "application/json");
            return;
        }

        int attempt;
        {
            std::lock_guard lock(mu);
            attempt = attempts[content]++;
        }
        if (attempt < static_cast<int>(script.status_prelude.size())) {
            res.status = script.status_prelude[static_cast<std::size_t>(attempt)];
            res.set_content("{\"error\": \"scripted status\"}", "application/json");
            return;
        }

        if (script.malformed_body) {
            res.status = 200;
            res.set_content("this is not json", "text/plain");
            return;
        }

        const long t = first_integer(content);
        nlohmann::json reply = {
            {"choices",
             nlohmann::json::array(
                 {{{"message", {{"role", "assistant"},
                                {"content", substitute(script.reply_template, t)}}}}})},
        };
        res.status = 200;
        res.set_content(reply.dump(), "application/json");
    });

    if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port <= 0) {
            std::fprintf(stderr, "cannot bind to %s\n", host.c_str());
            return 1;
        }
    } else if (!server.bind_to_port(host, port)) {
        std::fprintf(stderr, "cannot bind to %s:%d\n", host.c_str(), port);
        return 1;
    }

    if (!port_file.empty()) {
        std::ofstream pf(port_file, std::ios::trunc);
        pf << port << "\n";
    }
    if (!pid_file.empty()) {
        std::ofstream pf(pid_file, std::ios::trunc);
        pf << ::getpid() << "\n";
    }
    std::printf("PORT=%d\n", port);
    std::fflush(stdout);

    return server.listen_after_bind() ? 0 : 1;
}
