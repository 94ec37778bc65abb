#pragma once

// Tower of Hanoi world model: state, move legality, reference solver.
// Pegs are 1-based (1..3) and disks are 1..n with 1 the smallest.

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pixelswarm {

struct MoveSpec {
    int disk = 0;
    int from_peg = 0;
    int to_peg = 0;

    friend bool operator==(const MoveSpec&, const MoveSpec&) = default;
};

enum class MoveError {
    NonTopDisk,
    LargerOnSmaller,
    NullMove,
    SourceMismatch,
};

inline std::string_view to_string(MoveError e) {
    switch (e) {
        case MoveError::NonTopDisk: return "NonTopDisk";
        case MoveError::LargerOnSmaller: return "LargerOnSmaller";
        case MoveError::NullMove: return "NullMove";
        case MoveError::SourceMismatch: return "SourceMismatch";
    }
    return "Unknown";
}

struct HanoiState {
    int num_disks = 0;
    // Each stack is listed bottom to top.
    std::array<std::vector<int>, 3> pegs;

    const std::vector<int>& peg(int index) const { return pegs.at(static_cast<std::size_t>(index - 1)); }
    std::vector<int>& peg(int index) { return pegs.at(static_cast<std::size_t>(index - 1)); }

    /// Stacks strictly decreasing bottom-to-top and together holding exactly {1..n}.
    bool invariants_hold() const {
        std::vector<int> all;
        for (const auto& p : pegs) {
            for (std::size_t i = 1; i < p.size(); ++i)
                if (p[i] >= p[i - 1]) return false;
            all.insert(all.end(), p.begin(), p.end());
        }
        std::sort(all.begin(), all.end());
        if (static_cast<int>(all.size()) != num_disks) return false;
        for (int i = 0; i < num_disks; ++i)
            if (all[static_cast<std::size_t>(i)] != i + 1) return false;
        return true;
    }

    friend bool operator==(const HanoiState&, const HanoiState&) = default;
};

using MoveResult = std::variant<HanoiState, MoveError>;

inline HanoiState new_state(int n) {
    if (n < 1) throw std::invalid_argument("new_state: disk count must be >= 1");
    HanoiState s;
    s.num_disks = n;
    for (int d = n; d >= 1; --d) s.pegs[0].push_back(d);
    return s;
}

/// Returns the successor state, or the rule the move breaks. The input is
/// never modified.
inline MoveResult apply_move(const HanoiState& state, const MoveSpec& mv) {
    const auto in_peg_range = [](int p) { return p >= 1 && p <= 3; };
    if (!in_peg_range(mv.from_peg) || !in_peg_range(mv.to_peg))
        throw std::invalid_argument("apply_move: peg index outside 1..3");
    if (mv.disk < 1 || mv.disk > state.num_disks)
        throw std::invalid_argument("apply_move: disk outside 1..n");

    if (mv.from_peg == mv.to_peg) return MoveError::NullMove;
    const auto& src = state.peg(mv.from_peg);
    if (std::find(src.begin(), src.end(), mv.disk) == src.end()) return MoveError::SourceMismatch;
    if (src.back() != mv.disk) return MoveError::NonTopDisk;
    const auto& dst = state.peg(mv.to_peg);
    if (!dst.empty() && dst.back() < mv.disk) return MoveError::LargerOnSmaller;

    HanoiState next = state;
    next.peg(mv.from_peg).pop_back();
    next.peg(mv.to_peg).push_back(mv.disk);
    return next;
}

inline bool is_solved(const HanoiState& state) {
    return state.pegs[0].empty() && state.pegs[1].empty() &&
           static_cast<int>(state.pegs[2].size()) == state.num_disks;
}

namespace detail {
inline void hanoi_recurse(int n, int src, int aux, int dst, std::vector<MoveSpec>& out) {
    if (n == 0) return;
    hanoi_recurse(n - 1, src, dst, aux, out);
    out.push_back({n, src, dst});
    hanoi_recurse(n - 1, aux, src, dst, out);
}
}  // namespace detail

/// Classical optimal sequence of 2^n - 1 moves from peg 1 to peg 3.
inline std::vector<MoveSpec> solve_reference(int n) {
    if (n < 1) throw std::invalid_argument("solve_reference: disk count must be >= 1");
    if (n > 30) throw std::invalid_argument("solve_reference: disk count too large");
    std::vector<MoveSpec> out;
    out.reserve((std::size_t{1} << n) - 1);
    detail::hanoi_recurse(n, 1, 2, 3, out);
    return out;
}

struct SequenceReport {
    bool valid = false;
    std::optional<std::size_t> first_error_index;
    std::optional<MoveError> error;
    HanoiState final_state;
};

inline SequenceReport validate_sequence(int n, const std::vector<MoveSpec>& seq) {
    SequenceReport report;
    HanoiState state = new_state(n);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto r = apply_move(state, seq[i]);
        if (auto* err = std::get_if<MoveError>(&r)) {
            report.first_error_index = i;
            report.error = *err;
            report.final_state = state;
            return report;
        }
        state = std::move(std::get<HanoiState>(r));
    }
    report.valid = is_solved(state);
    report.final_state = std::move(state);
    return report;
}

}  // namespace pixelswarm
