#pragma once

// PixelGrid substrate: G x G micro-agents with lifecycle state, competence
// and attempt counters, plus the radial difficulty field.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pixelswarm {

enum class AgentState : std::uint8_t {
    Idle = 0,
    Working = 1,
    WaitingOracle = 2,
    Success = 3,
    Failure = 4,
};

inline constexpr std::size_t kNumAgentStates = 5;

inline std::string_view to_string(AgentState s) {
    switch (s) {
        case AgentState::Idle: return "Idle";
        case AgentState::Working: return "Working";
        case AgentState::WaitingOracle: return "WaitingOracle";
        case AgentState::Success: return "Success";
        case AgentState::Failure: return "Failure";
    }
    return "Unknown";
}

struct Coord {
    int i = 0;
    int j = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
};

struct Agent {
    Coord coord;
    AgentState state = AgentState::Idle;
    double competence = 0.0;
    std::int64_t attempts = 0;
    int category = 0;
    std::optional<double> last_confidence;
    std::optional<double> last_nll;
};

struct GridConfig {
    int size_g = 64;
    double eta = 0.10;
    double eta_oracle = 0.05;
    double alpha_pity = 0.05;
    double initial_competence = 0.0;

    void validate() const {
        if (size_g < 2) throw std::invalid_argument("GridConfig: size_g must be >= 2");
        if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("GridConfig: eta must be in (0,1]");
        if (!(eta_oracle > 0.0 && eta_oracle <= 1.0))
            throw std::invalid_argument("GridConfig: eta_oracle must be in (0,1]");
        if (!(alpha_pity >= 0.0)) throw std::invalid_argument("GridConfig: alpha_pity must be >= 0");
        if (!(initial_competence >= 0.0 && initial_competence < 1.0))
            throw std::invalid_argument("GridConfig: initial_competence must be in [0,1)");
    }
};

/// Normalized distance from the grid center ((G-1)/2, (G-1)/2), scaled by G/2.
/// Corner cells exceed 1.
inline double radial_difficulty(Coord c, int size_g) {
    const double center = (size_g - 1) / 2.0;
    const double di = c.i - center;
    const double dj = c.j - center;
    return std::sqrt(di * di + dj * dj) / (size_g / 2.0);
}

/// c + rate * (1 - c). Shared by local and oracle-verified success.
inline double competence_update(double c, double rate) { return c + rate * (1.0 - c); }

inline Agent record_failure(Agent agent) {
    agent.attempts += 1;
    agent.state = AgentState::Failure;
    return agent;
}

inline double pity_bonus(std::int64_t attempts, double alpha_pity) {
    return alpha_pity * static_cast<double>(attempts);
}

inline bool eligible(Coord c, double stage_radius, int size_g) {
    return radial_difficulty(c, size_g) <= stage_radius;
}

/// Row-major agent store. Difficulty is cached per cell since it never changes.
class PixelGrid {
public:
    PixelGrid() = default;

    explicit PixelGrid(const GridConfig& cfg) : size_(cfg.size_g) {
        cfg.validate();
        agents_.reserve(static_cast<std::size_t>(size_) * size_);
        difficulty_.reserve(agents_.capacity());
        for (int i = 0; i < size_; ++i) {
            for (int j = 0; j < size_; ++j) {
                Agent a;
                a.coord = {i, j};
                a.competence = cfg.initial_competence;
                agents_.push_back(a);
                difficulty_.push_back(radial_difficulty({i, j}, size_));
            }
        }
    }

    int size() const noexcept { return size_; }
    std::size_t num_agents() const noexcept { return agents_.size(); }

    bool in_bounds(Coord c) const noexcept { return c.i >= 0 && c.j >= 0 && c.i < size_ && c.j < size_; }

    std::size_t index(Coord c) const noexcept {
        return static_cast<std::size_t>(c.i) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(c.j);
    }

    Agent& at(Coord c) { return agents_.at(index(c)); }
    const Agent& at(Coord c) const { return agents_.at(index(c)); }
    Agent& operator[](std::size_t idx) { return agents_[idx]; }
    const Agent& operator[](std::size_t idx) const { return agents_[idx]; }

    double difficulty(std::size_t idx) const { return difficulty_[idx]; }
    double difficulty(Coord c) const { return difficulty_[index(c)]; }

    const std::vector<Agent>& agents() const noexcept { return agents_; }

    std::array<std::size_t, kNumAgentStates> state_counts() const {
        std::array<std::size_t, kNumAgentStates> counts{};
        for (const auto& a : agents_) counts[static_cast<std::size_t>(a.state)]++;
        return counts;
    }

    double mean_competence() const {
        double sum = 0.0;
        for (const auto& a : agents_) sum += a.competence;
        return agents_.empty() ? 0.0 : sum / static_cast<double>(agents_.size());
    }

    /// {"size": G, "state": [...], "competence": [...], "attempts": [...]}, row-major.
    nlohmann::json to_json() const {
        nlohmann::json state = nlohmann::json::array();
        nlohmann::json competence = nlohmann::json::array();
        nlohmann::json attempts = nlohmann::json::array();
        for (const auto& a : agents_) {
            state.push_back(static_cast<int>(a.state));
            competence.push_back(a.competence);
            attempts.push_back(a.attempts);
        }
        return {{"size", size_}, {"state", state}, {"competence", competence}, {"attempts", attempts}};
    }

private:
    int size_ = 0;
    std::vector<Agent> agents_;
    std::vector<double> difficulty_;
};

}  // namespace pixelswarm
