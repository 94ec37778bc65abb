#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace pixelswarm {

struct Stage {
    int index = 1;
    double radius = 0.0;      // attention radius R_s
    double reach = 0.0;       // outermost target distance for placed moves
    int first_move = 0;
    int last_move = 0;        // inclusive
    double tau = 0.75;        // advancement threshold
    std::string label;
};

class StageTable {
public:
    StageTable() = default;
    explicit StageTable(std::vector<Stage> stages) : stages_(std::move(stages)) { validate(); }

    /// Four stages: radii 0.18/0.45/0.72/0.99 over moves 0-6, 7-15, 16-24, 25-30.
    static StageTable defaults(double tau = 0.75) {
        return StageTable({
            {1, 0.18, 0.18, 0, 6, tau, "Center"},
            {2, 0.45, 0.45, 7, 15, tau, "Inner"},
            {3, 0.72, 0.72, 16, 24, tau, "Outer"},
            {4, 0.99, 0.90, 25, 30, tau, "Edge"},
        });
    }

    /// Default radii with the 7/9/9/6 move split scaled to M moves.
    static StageTable proportional(int num_moves, double tau = 0.75) {
        if (num_moves < 4) throw std::invalid_argument("StageTable: need at least one move per stage");
        const int cuts[] = {7, 16, 25, 31};
        auto rows = defaults(tau).stages_;
        int first = 0;
        for (std::size_t s = 0; s < rows.size(); ++s) {
            int last = static_cast<int>(static_cast<long long>(cuts[s]) * num_moves / 31) - 1;
            last = std::max(last, first);
            if (s + 1 == rows.size()) last = num_moves - 1;
            rows[s].first_move = first;
            rows[s].last_move = last;
            first = last + 1;
        }
        return StageTable(std::move(rows));
    }

    void validate() const {
        if (stages_.empty()) throw std::invalid_argument("StageTable: no stages");
        int expected_move = 0;
        double prev_radius = 0.0;
        for (std::size_t s = 0; s < stages_.size(); ++s) {
            const auto& st = stages_[s];
            if (st.index != static_cast<int>(s) + 1)
                throw std::invalid_argument("StageTable: stage indices must be 1..S in order");
            if (!(st.radius > prev_radius) || st.radius > 1.0)
                throw std::invalid_argument("StageTable: radii must be strictly increasing within (0,1]");
            if (!(st.reach > prev_radius && st.reach <= st.radius))
                throw std::invalid_argument("StageTable: reach must lie in (R_{s-1}, R_s]");
            if (st.first_move != expected_move || st.last_move < st.first_move)
                throw std::invalid_argument("StageTable: move ranges must partition 0..M-1");
            expected_move = st.last_move + 1;
            prev_radius = st.radius;
        }
    }

    int num_stages() const noexcept { return static_cast<int>(stages_.size()); }
    int num_moves() const noexcept { return stages_.back().last_move + 1; }

    const Stage& stage(int index) const { return stages_.at(static_cast<std::size_t>(index - 1)); }
    const std::vector<Stage>& stages() const noexcept { return stages_; }

    /// Inner edge of stage s's annulus (0 for stage 1).
    double inner_radius(int index) const { return index <= 1 ? 0.0 : stage(index - 1).radius; }

    /// Stage whose move range owns move k.
    int stage_of_move(int k) const {
        for (const auto& st : stages_)
            if (k >= st.first_move && k <= st.last_move) return st.index;
        throw std::out_of_range("StageTable: move index not covered");
    }

    /// Stage whose annulus contains distance d, or 0 when d lies beyond the last radius.
    int stage_of_distance(double d) const {
        for (const auto& st : stages_)
            if (d <= st.radius) return st.index;
        return 0;
    }

    void set_tau(double tau) {
        for (auto& st : stages_) st.tau = tau;
    }

private:
    std::vector<Stage> stages_;
};

}  // namespace pixelswarm
