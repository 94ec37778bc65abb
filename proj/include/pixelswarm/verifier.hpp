#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace pixelswarm {

struct VerifierConfig {
    double gamma = 1.0;
    double theta = 1.5;
    double alpha_pity = 0.05;

    /// Threshold no score can reach; every decision escalates.
    static constexpr double kAlwaysEscalate = std::numeric_limits<double>::infinity();

    bool forces_escalation() const noexcept { return std::isinf(theta) && theta > 0; }

    void validate() const {
        if (!(gamma >= 0.0)) throw std::invalid_argument("VerifierConfig: gamma must be >= 0");
        if (!(alpha_pity >= 0.0)) throw std::invalid_argument("VerifierConfig: alpha_pity must be >= 0");
        if (std::isnan(theta) || (std::isinf(theta) && theta < 0))
            throw std::invalid_argument("VerifierConfig: theta must be finite or +inf");
    }
};

inline double verification_score(double c, double d, std::int64_t attempts, double p, const VerifierConfig& cfg) {
    return c + (1.0 - d) + cfg.alpha_pity * static_cast<double>(attempts) + cfg.gamma * p;
}

enum class GateDecision { ActLocally, Escalate };

inline std::string_view to_string(GateDecision g) { return g == GateDecision::ActLocally ? "ActLocally" : "Escalate"; }

inline GateDecision gate(double v, double theta) { return v >= theta ? GateDecision::ActLocally : GateDecision::Escalate; }

/// Smallest attempt count at which the pity bonus alone lets the agent act
/// locally. Requires alpha_pity > 0.
inline std::int64_t pity_escape_attempts(double c, double d, double p, const VerifierConfig& cfg) {
    if (!(cfg.alpha_pity > 0.0)) throw std::invalid_argument("pity_escape_attempts: alpha_pity must be > 0");
    if (cfg.forces_escalation()) throw std::invalid_argument("pity_escape_attempts: theta is the escalation sentinel");
    const double gap = cfg.theta - c - (1.0 - d) - cfg.gamma * p;
    if (gap <= 0.0) return 0;
    auto a = static_cast<std::int64_t>(std::ceil(gap / cfg.alpha_pity));
    // ceil of a rounded quotient can land one short or one over.
    while (a > 0 && gate(verification_score(c, d, a - 1, p, cfg), cfg.theta) == GateDecision::ActLocally) --a;
    while (gate(verification_score(c, d, a, p, cfg), cfg.theta) == GateDecision::Escalate) ++a;
    return a;
}

}  // namespace pixelswarm
