#pragma once

// Local decision backend: prompt wire format, the simulated SLM confidence
// model, NLL, and the simulated Oracle.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "grid.hpp"
#include "rng.hpp"

namespace pixelswarm {

inline std::string serialize_prompt(Coord c, int category) {
    return "pixel:" + std::to_string(c.i) + "," + std::to_string(c.j) + ",cat:" + std::to_string(category);
}

struct ParsedPrompt {
    Coord coord;
    int category = 0;
    friend bool operator==(const ParsedPrompt&, const ParsedPrompt&) = default;
};

/// Inverse of serialize_prompt. Returns nullopt on anything that is not the
/// exact "pixel:<i>,<j>,cat:<c>" shape.
inline std::optional<ParsedPrompt> parse_prompt(std::string_view text) {
    const auto take_int = [&text](int& out) {
        const auto* first = text.data();
        const auto* last = text.data() + text.size();
        if (first == last || *first == '+') return false;
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc{}) return false;
        text.remove_prefix(static_cast<std::size_t>(ptr - first));
        return true;
    };
    const auto take_lit = [&text](std::string_view lit) {
        if (!text.starts_with(lit)) return false;
        text.remove_prefix(lit.size());
        return true;
    };
    ParsedPrompt p;
    if (!take_lit("pixel:") || !take_int(p.coord.i) || !take_lit(",") || !take_int(p.coord.j) ||
        !take_lit(",cat:") || !take_int(p.category) || !text.empty())
        return std::nullopt;
    return p;
}

struct DecisionRequest {
    Coord coord;
    int category = 0;
    std::string prompt;

    static DecisionRequest make(Coord c, int category) { return {c, category, serialize_prompt(c, category)}; }
};

struct DecisionResponse {
    double confidence = 0.5;
    std::string verdict_text;
    bool success = false;
};

struct OracleVerdict {
    int value = 0;
    friend bool operator==(const OracleVerdict&, const OracleVerdict&) = default;
};

inline constexpr double kDefaultNllEpsilon = 1e-6;

inline double nll(double p, double epsilon = kDefaultNllEpsilon) { return -std::log(std::max(epsilon, p)); }

/// Mean NLL over the tick's deciders; nullopt is the "no decisions" marker.
inline std::optional<double> mean_nll(std::span<const double> values) {
    if (values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

struct SimBackendParams {
    double w_comp = 0.5;
    double w_ease = 0.5;
    double floor = 0.02;
    double ceiling = 0.98;
    double miscalibration = 1.0;  // kappa; 1 means reports are calibrated
    double oracle_boost = 0.3;
    double epsilon = kDefaultNllEpsilon;

    void validate() const {
        if (!(w_comp >= 0.0 && w_ease >= 0.0)) throw std::invalid_argument("SimBackendParams: weights must be >= 0");
        if (!(floor > 0.0 && floor < ceiling && ceiling < 1.0))
            throw std::invalid_argument("SimBackendParams: need 0 < floor < ceiling < 1");
        if (!(miscalibration > 0.0)) throw std::invalid_argument("SimBackendParams: miscalibration must be > 0");
        if (!(oracle_boost >= 0.0)) throw std::invalid_argument("SimBackendParams: oracle_boost must be >= 0");
        if (!(epsilon > 0.0 && epsilon <= 1e-3)) throw std::invalid_argument("SimBackendParams: epsilon must be in (0, 1e-3]");
    }
};

/// Latent success probability of the simulated backend.
inline double latent_success_probability(double competence, double d, const SimBackendParams& p) {
    return std::clamp(p.w_comp * competence + p.w_ease * (1.0 - d), p.floor, p.ceiling);
}

inline double reported_confidence(double q, const SimBackendParams& p) {
    return std::clamp(std::pow(q, p.miscalibration), p.epsilon, 1.0 - p.epsilon);
}

/// `rng` must be the agent's stream for this tick.
inline DecisionResponse simulated_slm_decide(const Agent& agent, double d, const SimBackendParams& params,
                                             CounterRng& rng) {
    const double q = latent_success_probability(agent.competence, d, params);
    DecisionResponse r;
    r.success = rng.bernoulli(q);
    r.confidence = reported_confidence(q, params);
    r.verdict_text = r.success ? "verified" : "rejected";
    return r;
}

inline double oracle_success_probability(double competence, double d, const SimBackendParams& p) {
    return std::clamp(latent_success_probability(competence, d, p) + p.oracle_boost, p.floor, p.ceiling);
}

inline OracleVerdict simulated_oracle_verdict(const Agent& agent, double d, const SimBackendParams& params,
                                              CounterRng& rng) {
    if (agent.state != AgentState::WaitingOracle)
        throw std::logic_error("simulated_oracle_verdict: agent is not awaiting the oracle");
    return {rng.bernoulli(oracle_success_probability(agent.competence, d, params)) ? 1 : 0};
}

inline Agent apply_oracle_verdict(Agent agent, OracleVerdict verdict, double eta_oracle) {
    if (agent.state != AgentState::WaitingOracle)
        throw std::logic_error("apply_oracle_verdict: agent is not awaiting the oracle");
    if (verdict.value != 0 && verdict.value != 1) throw std::invalid_argument("apply_oracle_verdict: verdict must be 0 or 1");
    if (verdict.value == 1) {
        agent.state = AgentState::Success;
        agent.competence = competence_update(agent.competence, eta_oracle);
    } else {
        agent.state = AgentState::Failure;
        agent.attempts += 1;
    }
    return agent;
}

}  // namespace pixelswarm
