#pragma once

// Independent legality model for small puzzles: a state is the peg of each
// disk, legality is read straight off that assignment.

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hanoi.hpp"

namespace pixelswarm {

struct BruteForceReport {
    std::size_t states_visited = 0;
    std::size_t moves_checked = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
};

namespace detail {

// peg_of[d-1] in 1..3
using PegAssignment = std::vector<int>;

inline HanoiState assignment_to_state(const PegAssignment& a) {
    HanoiState s;
    s.num_disks = static_cast<int>(a.size());
    for (int d = s.num_disks; d >= 1; --d) s.peg(a[static_cast<std::size_t>(d - 1)]).push_back(d);
    return s;
}

inline bool legal_by_assignment(const PegAssignment& a, const MoveSpec& m) {
    if (m.from_peg == m.to_peg) return false;
    if (a[static_cast<std::size_t>(m.disk - 1)] != m.from_peg) return false;
    for (int d = 1; d < m.disk; ++d) {
        const int p = a[static_cast<std::size_t>(d - 1)];
        if (p == m.from_peg || p == m.to_peg) return false;
    }
    return true;
}

}  // namespace detail

/// Breadth-first walk of every reachable state; each (disk, from, to)
/// candidate is run through apply_move and compared with the assignment model.
inline BruteForceReport brute_force_check(int n) {
    if (n < 1 || n > 6) throw std::invalid_argument("brute_force_check: n must be in 1..6");
    BruteForceReport report;
    std::map<detail::PegAssignment, bool> seen;
    std::deque<detail::PegAssignment> frontier;
    detail::PegAssignment start(static_cast<std::size_t>(n), 1);
    seen[start] = true;
    frontier.push_back(start);
    while (!frontier.empty()) {
        const auto a = frontier.front();
        frontier.pop_front();
        ++report.states_visited;
        const auto state = detail::assignment_to_state(a);
        for (int disk = 1; disk <= n; ++disk) {
            for (int from = 1; from <= 3; ++from) {
                for (int to = 1; to <= 3; ++to) {
                    const MoveSpec m{disk, from, to};
                    ++report.moves_checked;
                    const bool expect_legal = detail::legal_by_assignment(a, m);
                    const auto r = apply_move(state, m);
                    bool ok = std::holds_alternative<HanoiState>(r) == expect_legal;
                    if (ok && expect_legal) {
                        auto next = a;
                        next[static_cast<std::size_t>(disk - 1)] = to;
                        ok = std::get<HanoiState>(r) == detail::assignment_to_state(next);
                        if (!seen.count(next)) {
                            seen[next] = true;
                            frontier.push_back(next);
                        }
                    }
                    if (!ok && report.mismatches++ == 0)
                        report.first_mismatch = "disk " + std::to_string(disk) + " " + std::to_string(from) + "->" +
                                                std::to_string(to);
                }
            }
        }
    }
    return report;
}

}  // namespace pixelswarm
