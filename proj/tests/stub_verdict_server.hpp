#pragma once

// In-process verdict service for protocol tests. Verdicts come from a
// caller-supplied rule over (i, j); every request body is recorded.

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

class StubVerdictServer {
public:
    using Rule = std::function<int(int i, int j)>;

    explicit StubVerdictServer(Rule rule) : rule_(std::move(rule)) {
        server_.Post("/v1/verdicts", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mu_);
                bodies_.push_back(req.body);
            }
            if (fail_next_ > 0) {
                --fail_next_;
                res.status = 503;
                return;
            }
            if (malformed_) {
                res.set_content("{\"verdicts\": [1]}", "application/json");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            nlohmann::json verdicts = nlohmann::json::array();
            nlohmann::json conf = nlohmann::json::array();
            for (const auto& item : body.at("batch")) {
                const int v = rule_(item.at("i").get<int>(), item.at("j").get<int>());
                verdicts.push_back(v);
                conf.push_back(v ? 0.9 : 0.2);
            }
            res.set_content(nlohmann::json{{"verdicts", verdicts}, {"confidences", conf}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubVerdictServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::vector<std::string> bodies() const {
        std::lock_guard lock(mu_);
        return bodies_;
    }

    std::size_t calls() const { return bodies().size(); }

    void fail_next(int n) { fail_next_ = n; }
    void set_malformed(bool m) { malformed_ = m; }

private:
    Rule rule_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mu_;
    std::vector<std::string> bodies_;
    std::atomic<int> fail_next_{0};
    std::atomic<bool> malformed_{false};
};
