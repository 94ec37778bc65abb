#pragma once

// Batched client for the remote verdict service (POST /v1/verdicts).

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "decision.hpp"

namespace pixelswarm {

/// Connection failure or non-200 status. Retryable.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A 200 reply whose body does not follow the verdict schema. Not retryable.
struct MalformedResponse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportReply {
    int status = 0;
    std::string body;
};

class VerdictTransport {
public:
    virtual ~VerdictTransport() = default;
    /// Sends one request body. Throws TransportError when nothing came back.
    virtual TransportReply post_verdicts(const std::string& body) = 0;
};

class HttpVerdictTransport final : public VerdictTransport {
public:
    explicit HttpVerdictTransport(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
        std::string base = endpoint;
        const auto scheme = base.find("://");
        const auto path_start = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        std::string prefix;
        if (path_start != std::string::npos) {
            prefix = base.substr(path_start);
            base.resize(path_start);
        }
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        path_ = prefix.ends_with("/v1/verdicts") ? prefix : prefix + "/v1/verdicts";
        client_ = std::make_unique<httplib::Client>(base);
        if (!client_->is_valid()) throw std::invalid_argument("HttpVerdictTransport: bad endpoint " + endpoint);
        client_->set_connection_timeout(timeout);
        client_->set_read_timeout(timeout);
        client_->set_write_timeout(timeout);
    }

    TransportReply post_verdicts(const std::string& body) override {
        auto res = client_->Post(path_, body, "application/json");
        if (!res) throw TransportError("POST " + path_ + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    std::unique_ptr<httplib::Client> client_;
    std::string path_;
};

struct RouterConfig {
    int max_batch = 16;
    std::int64_t max_wait_ms = 50;
    int max_retries = 3;  // ticks an escalation may stay unresolved before it is failed
    bool strict = true;   // malformed replies abort instead of becoming Failure verdicts
    std::int64_t timeout_ms = 10'000;

    void validate() const {
        if (max_batch < 1) throw std::invalid_argument("RouterConfig: max_batch must be >= 1");
        if (max_wait_ms < 0) throw std::invalid_argument("RouterConfig: max_wait_ms must be >= 0");
        if (max_retries < 0) throw std::invalid_argument("RouterConfig: max_retries must be >= 0");
        if (timeout_ms <= 0) throw std::invalid_argument("RouterConfig: timeout_ms must be > 0");
    }
};

inline nlohmann::json batch_body(std::span<const DecisionRequest> batch) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& r : batch)
        items.push_back({{"prompt", r.prompt}, {"i", r.coord.i}, {"j", r.coord.j}, {"cat", r.category}});
    return {{"batch", items}};
}

struct ParsedVerdicts {
    std::vector<OracleVerdict> verdicts;
    std::vector<std::optional<double>> confidences;
};

/// Throws MalformedResponse unless the body carries exactly `expected`
/// binary verdicts (and, if present, as many confidences).
inline ParsedVerdicts parse_verdict_body(const std::string& body, std::size_t expected) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedResponse("verdict reply is not a JSON object");
    const auto it = j.find("verdicts");
    if (it == j.end() || !it->is_array()) throw MalformedResponse("verdict reply lacks a verdicts array");
    if (it->size() != expected)
        throw MalformedResponse("verdict reply has " + std::to_string(it->size()) + " verdicts, expected " +
                                std::to_string(expected));
    ParsedVerdicts out;
    for (const auto& v : *it) {
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
            throw MalformedResponse("verdict values must be 0 or 1");
        out.verdicts.push_back({v.get<int>()});
    }
    out.confidences.assign(expected, std::nullopt);
    if (const auto c = j.find("confidences"); c != j.end()) {
        if (!c->is_array() || c->size() != expected) throw MalformedResponse("confidences must match verdicts");
        for (std::size_t i = 0; i < expected; ++i) {
            if (!(*c)[i].is_number()) throw MalformedResponse("confidences must be numbers");
            out.confidences[i] = (*c)[i].get<double>();
        }
    }
    return out;
}

struct BatchOutcome {
    // nullopt marks a request whose batch hit a transport error; retry later.
    std::vector<std::optional<OracleVerdict>> verdicts;
    std::vector<std::optional<double>> confidences;
    int upstream_calls = 0;
    int failed_calls = 0;
    int malformed_calls = 0;
};

/// Sends requests in order, max_batch at a time. Verdicts come back aligned
/// with the input. Malformed replies throw in strict mode and turn into 0
/// verdicts otherwise.
inline BatchOutcome remote_oracle_batch(std::span<const DecisionRequest> requests, const RouterConfig& cfg,
                                        VerdictTransport& transport) {
    cfg.validate();
    BatchOutcome out;
    out.verdicts.assign(requests.size(), std::nullopt);
    out.confidences.assign(requests.size(), std::nullopt);
    const auto max_batch = static_cast<std::size_t>(cfg.max_batch);
    for (std::size_t start = 0; start < requests.size(); start += max_batch) {
        const std::size_t n = std::min(max_batch, requests.size() - start);
        const auto chunk = requests.subspan(start, n);
        ++out.upstream_calls;
        TransportReply reply;
        try {
            reply = transport.post_verdicts(batch_body(chunk).dump());
        } catch (const TransportError&) {
            ++out.failed_calls;
            continue;
        }
        if (reply.status != 200) {
            ++out.failed_calls;
            continue;
        }
        try {
            auto parsed = parse_verdict_body(reply.body, n);
            for (std::size_t i = 0; i < n; ++i) {
                out.verdicts[start + i] = parsed.verdicts[i];
                out.confidences[start + i] = parsed.confidences[i];
            }
        } catch (const MalformedResponse&) {
            if (cfg.strict) throw;
            ++out.malformed_calls;
            for (std::size_t i = 0; i < n; ++i) out.verdicts[start + i] = OracleVerdict{0};
        }
    }
    return out;
}

/// Streaming front end: queues escalations and releases a batch once it is
/// full or its oldest entry has waited max_wait_ms.
class Router {
public:
    explicit Router(RouterConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void submit(std::size_t id, std::int64_t now_ms) { pending_.push_back({id, now_ms}); }

    std::size_t pending() const noexcept { return pending_.size(); }

    std::vector<std::vector<std::size_t>> take_ready(std::int64_t now_ms) {
        std::vector<std::vector<std::size_t>> out;
        const auto max_batch = static_cast<std::size_t>(cfg_.max_batch);
        while (pending_.size() >= max_batch) out.push_back(pop(max_batch));
        if (!pending_.empty() && now_ms - pending_.front().enqueued_ms >= cfg_.max_wait_ms)
            out.push_back(pop(pending_.size()));
        return out;
    }

    /// Releases everything; used at the tick barrier.
    std::vector<std::vector<std::size_t>> flush() {
        std::vector<std::vector<std::size_t>> out;
        while (!pending_.empty()) out.push_back(pop(std::min<std::size_t>(pending_.size(), cfg_.max_batch)));
        return out;
    }

private:
    struct Item {
        std::size_t id;
        std::int64_t enqueued_ms;
    };

    std::vector<std::size_t> pop(std::size_t n) {
        std::vector<std::size_t> batch;
        for (std::size_t i = 0; i < n; ++i) {
            batch.push_back(pending_.front().id);
            pending_.pop_front();
        }
        return batch;
    }

    RouterConfig cfg_;
    std::deque<Item> pending_;
};

}  // namespace pixelswarm
