#pragma once

// Stage gating, the arm/region partition, and reward shaping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grid.hpp"
#include "stage_table.hpp"

namespace pixelswarm {

inline int arm_to_stage(int arm, int num_stages) {
    if (arm < 0) throw std::invalid_argument("arm_to_stage: arm must be >= 0");
    if (num_stages < 1) throw std::invalid_argument("arm_to_stage: need at least one stage");
    return arm % num_stages + 1;
}

/// Arm k covers the annulus of stage (k mod S)+1. Arms that share a stage
/// split it into equal angular sectors, ordered by k.
class RegionPartition {
public:
    RegionPartition() = default;

    RegionPartition(int size_g, const StageTable& stages, int num_arms)
        : num_arms_(num_arms), num_stages_(stages.num_stages()) {
        if (num_arms < 1) throw std::invalid_argument("RegionPartition: need at least one arm");
        if (size_g < 2) throw std::invalid_argument("RegionPartition: size_g must be >= 2");
        cells_.resize(static_cast<std::size_t>(num_arms));
        arm_of_cell_.assign(static_cast<std::size_t>(size_g) * size_g, -1);
        stage_of_cell_.assign(arm_of_cell_.size(), 0);

        const double center = (size_g - 1) / 2.0;
        for (int i = 0; i < size_g; ++i) {
            for (int j = 0; j < size_g; ++j) {
                const auto idx = static_cast<std::size_t>(i) * size_g + j;
                const int stage = stages.stage_of_distance(radial_difficulty({i, j}, size_g));
                stage_of_cell_[idx] = stage;
                if (stage == 0) continue;
                const int sharing = arms_for_stage(stage);
                if (sharing == 0) continue;
                double angle = std::atan2(j - center, i - center);
                if (angle < 0.0) angle += 2.0 * std::numbers::pi;
                const int sector =
                    std::min(static_cast<int>(angle / (2.0 * std::numbers::pi) * sharing), sharing - 1);
                const int arm = (stage - 1) + sector * num_stages_;
                arm_of_cell_[idx] = arm;
                cells_[static_cast<std::size_t>(arm)].push_back(idx);
            }
        }
    }

    int num_arms() const noexcept { return num_arms_; }
    int num_stages() const noexcept { return num_stages_; }
    int stage_of_arm(int arm) const { return arm_to_stage(arm, num_stages_); }

    /// Number of arms mapped onto the given stage.
    int arms_for_stage(int stage) const {
        int n = 0;
        for (int k = 0; k < num_arms_; ++k)
            if (arm_to_stage(k, num_stages_) == stage) ++n;
        return n;
    }

    /// Row-major cell indices of arm k, ascending.
    const std::vector<std::size_t>& cells(int arm) const { return cells_.at(static_cast<std::size_t>(arm)); }

    /// -1 for cells outside every arm (corners beyond the last radius).
    int arm_of_cell(std::size_t idx) const { return arm_of_cell_.at(idx); }

    /// Stage annulus a cell belongs to, 0 beyond the last radius.
    int stage_of_cell(std::size_t idx) const { return stage_of_cell_.at(idx); }

private:
    int num_arms_ = 0;
    int num_stages_ = 0;
    std::vector<std::vector<std::size_t>> cells_;
    std::vector<int> arm_of_cell_;
    std::vector<int> stage_of_cell_;
};

enum class AdvanceMode { Performance, FixedTime };

inline std::string_view to_string(AdvanceMode m) { return m == AdvanceMode::Performance ? "performance" : "fixed_time"; }

struct AdvancePolicy {
    AdvanceMode mode = AdvanceMode::Performance;
    std::int64_t interval = 500;  // FixedTime only
};

inline double success_fraction(const PixelGrid& grid, std::span<const std::size_t> region) {
    if (region.empty()) throw std::invalid_argument("success_fraction: empty region");
    std::size_t green = 0;
    for (auto idx : region)
        if (grid[idx].state == AgentState::Success) ++green;
    return static_cast<double>(green) / static_cast<double>(region.size());
}

inline bool stage_advance_check(const PixelGrid& grid, std::span<const std::size_t> active_region, double tau,
                                const AdvancePolicy& policy, std::int64_t elapsed_in_stage) {
    if (policy.mode == AdvanceMode::FixedTime) return elapsed_in_stage >= policy.interval;
    return success_fraction(grid, active_region) >= tau;
}

struct RegionStats {
    double mean_competence = 0.0;
    std::optional<double> mean_nll;  // nullopt when nobody in the region decided
    std::int64_t oracle_count = 0;
    std::int64_t population = 0;
};

/// `tick_nll` holds the NLL of every cell that decided this tick (nullopt
/// elsewhere); `escalated` flags this tick's escalations.
inline RegionStats region_stats(const PixelGrid& grid, std::span<const std::size_t> arm_cells,
                                std::span<const std::optional<double>> tick_nll,
                                std::span<const std::uint8_t> escalated) {
    if (arm_cells.empty()) throw std::invalid_argument("region_stats: empty region");
    RegionStats s;
    double comp = 0.0;
    double nll_sum = 0.0;
    std::int64_t deciders = 0;
    for (auto idx : arm_cells) {
        comp += grid[idx].competence;
        if (idx < tick_nll.size() && tick_nll[idx]) {
            nll_sum += *tick_nll[idx];
            ++deciders;
        }
        if (idx < escalated.size() && escalated[idx]) ++s.oracle_count;
    }
    s.population = static_cast<std::int64_t>(arm_cells.size());
    s.mean_competence = comp / static_cast<double>(s.population);
    if (deciders > 0) s.mean_nll = nll_sum / static_cast<double>(deciders);
    return s;
}

inline double likelihood_reward(std::optional<double> v) { return v ? std::exp(-*v) : 0.0; }

enum class RewardForm { Convex, Penalized };

struct RewardWeights {
    double w_c = 0.5;
    double w_n = 0.5;
    double alpha_r = 1.0;
    double beta_r = 1.0;
    double lambda_r = 1.0;
    double alpha_o = 1.0;
    double beta_o = 1.0;
    double gamma_o = 0.0;
    RewardForm form = RewardForm::Convex;

    void validate() const {
        if (!(w_c >= 0.0 && w_n >= 0.0) || std::abs(w_c + w_n - 1.0) > 1e-12)
            throw std::invalid_argument("RewardWeights: w_c and w_n must be >= 0 and sum to 1");
        if (!(alpha_r >= 0.0 && beta_r >= 0.0 && lambda_r >= 0.0))
            throw std::invalid_argument("RewardWeights: penalized weights must be >= 0");
    }
};

inline double combined_reward(const RegionStats& s, const RewardWeights& w) {
    return w.w_c * s.mean_competence + w.w_n * likelihood_reward(s.mean_nll);
}

inline double penalized_reward(const RegionStats& s, const RewardWeights& w) {
    if (s.population <= 0) throw std::invalid_argument("penalized_reward: empty region");
    const double raw = w.alpha_r * s.mean_competence + w.beta_r * likelihood_reward(s.mean_nll) -
                       w.lambda_r * static_cast<double>(s.oracle_count) / static_cast<double>(s.population);
    return std::clamp(raw, 0.0, 1.0);
}

/// Oracle-thrift term: 1 - O/N, so more escalation means less reward.
inline double oracle_thrift(const RegionStats& s) {
    if (s.population <= 0) return 1.0;
    return 1.0 - static_cast<double>(s.oracle_count) / static_cast<double>(s.population);
}

/// Unnormalized objective alpha*r_c + beta*r_nll + gamma*r_o. Reporting
/// only; the bandit never sees it.
inline double objective(const RegionStats& s, const RewardWeights& w) {
    return w.alpha_o * s.mean_competence + w.beta_o * likelihood_reward(s.mean_nll) + w.gamma_o * oracle_thrift(s);
}

inline double region_reward(const RegionStats& s, const RewardWeights& w) {
    return w.form == RewardForm::Convex ? combined_reward(s, w) : penalized_reward(s, w);
}

}  // namespace pixelswarm
