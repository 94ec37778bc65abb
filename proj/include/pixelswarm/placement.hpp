#pragma once

// Projection of the move sequence onto grid cells, and the Composer that
// turns green neighborhoods back into puzzle moves.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "grid.hpp"
#include "hanoi.hpp"
#include "stage_table.hpp"

namespace pixelswarm {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Square-spiral ring index of move k: smallest L with (2L+1)^2 > k.
inline int spiral_layer(long long k) {
    if (k < 0) throw std::invalid_argument("spiral_layer: k must be >= 0");
    auto layer = static_cast<long long>(std::ceil((std::sqrt(static_cast<double>(k) + 1.0) - 1.0) / 2.0));
    // Guard against floating error at perfect squares.
    while (layer > 0 && (2 * layer - 1) * (2 * layer - 1) > k) --layer;
    while ((2 * layer + 1) * (2 * layer + 1) <= k) ++layer;
    return static_cast<int>(layer);
}

/// Canonical integer square spiral. Ring L ends at (L, -L) with index
/// (2L+1)^2 - 1; earlier indices walk back along the bottom, left, top and
/// right sides.
inline Offset integer_spiral(long long k) {
    const long long layer = spiral_layer(k);
    if (layer == 0) return {0, 0};
    const long long last = (2 * layer + 1) * (2 * layer + 1) - 1;
    const long long t = last - k;
    const long long side = 2 * layer;
    long long x = 0;
    long long y = 0;
    if (t <= side) {
        x = layer - t;
        y = -layer;
    } else if (t <= 2 * side) {
        x = -layer;
        y = -layer + (t - side);
    } else if (t <= 3 * side) {
        x = -layer + (t - 2 * side);
        y = layer;
    } else {
        x = layer;
        y = layer - (t - 3 * side);
    }
    return {static_cast<int>(x), static_cast<int>(y)};
}

enum class MapMode { IntegerSpiral, BandedSpiral };

inline std::string_view to_string(MapMode m) {
    return m == MapMode::IntegerSpiral ? "integer_spiral" : "banded_spiral";
}

struct MoveMapEntry {
    int k = 0;
    Coord coord;
    int stage = 1;
    double target_d = 0.0;  // interpolated radius the move was aimed at
    double d = 0.0;         // radial difficulty of the cell actually used
};

struct MoveMap {
    std::vector<MoveMapEntry> entries;
    MapMode mode = MapMode::BandedSpiral;
    int size_g = 0;

    std::size_t size() const noexcept { return entries.size(); }
    const MoveMapEntry& operator[](std::size_t k) const { return entries[k]; }

    nlohmann::json to_json() const {
        nlohmann::json moves = nlohmann::json::array();
        for (const auto& e : entries)
            moves.push_back({{"k", e.k},
                             {"x", e.coord.i},
                             {"y", e.coord.j},
                             {"stage", e.stage},
                             {"target_d", e.target_d},
                             {"d", e.d}});
        return {{"mode", std::string(to_string(mode))}, {"size_g", size_g}, {"moves", moves}};
    }
};

struct MoveMapOptions {
    int window_radius = 1;
    double angular_step = std::numbers::pi * (3.0 - std::sqrt(5.0));  // golden angle
    double first_radius = 0.02;
    double max_radius = 0.99;
};

namespace detail {

inline bool window_clears_radius(Coord c, int window_radius, int size_g, double radius) {
    for (int di = -window_radius; di <= window_radius; ++di) {
        for (int dj = -window_radius; dj <= window_radius; ++dj) {
            const Coord w{c.i + di, c.j + dj};
            if (w.i < 0 || w.j < 0 || w.i >= size_g || w.j >= size_g) continue;
            if (radial_difficulty(w, size_g) <= radius) return false;
        }
    }
    return true;
}

}  // namespace detail

/// Places M moves on a G x G grid. BandedSpiral keeps every move of stage s
/// inside that stage's annulus and keeps its Composer window clear of the
/// previous stage's disc, so a move only becomes completable once its stage
/// is unlocked.
inline MoveMap build_move_map(int num_moves, int size_g, MapMode mode, const StageTable& stages,
                              const MoveMapOptions& opts = {}) {
    if (num_moves < 1) throw std::invalid_argument("build_move_map: need at least one move");
    if (stages.num_moves() != num_moves)
        throw std::invalid_argument("build_move_map: stage table does not cover 0..M-1");
    if (size_g < 2) throw std::invalid_argument("build_move_map: size_g must be >= 2");

    MoveMap map;
    map.mode = mode;
    map.size_g = size_g;
    std::vector<char> used(static_cast<std::size_t>(size_g) * size_g, 0);
    const auto cell_index = [size_g](Coord c) {
        return static_cast<std::size_t>(c.i) * static_cast<std::size_t>(size_g) + static_cast<std::size_t>(c.j);
    };

    if (mode == MapMode::IntegerSpiral) {
        const int center = (size_g - 1) / 2;
        for (int k = 0; k < num_moves; ++k) {
            const Offset off = integer_spiral(k);
            const Coord c{center + off.dx, center + off.dy};
            if (c.i < 0 || c.j < 0 || c.i >= size_g || c.j >= size_g ||
                radial_difficulty(c, size_g) > opts.max_radius)
                throw std::runtime_error("build_move_map: integer spiral leaves the usable disc");
            const double d = radial_difficulty(c, size_g);
            map.entries.push_back({k, c, stages.stage_of_move(k), d, d});
        }
        return map;
    }

    const double center = (size_g - 1) / 2.0;
    const double half = size_g / 2.0;
    const double margin = (opts.window_radius * std::numbers::sqrt2 + 0.5) / half;

    for (const auto& st : stages.stages()) {
        const double inner = stages.inner_radius(st.index);
        const double lo = st.index == 1 ? opts.first_radius : std::min(inner + margin, st.reach);
        const double hi = st.reach;
        const int n = st.last_move - st.first_move + 1;
        for (int idx = 0; idx < n; ++idx) {
            const int k = st.first_move + idx;
            const double frac = n > 1 ? static_cast<double>(idx) / (n - 1) : 0.5;
            const double target_r = lo + (hi - lo) * frac;
            const double theta = k * opts.angular_step;
            const double tx = center + target_r * half * std::cos(theta);
            const double ty = center + target_r * half * std::sin(theta);
            const Coord base{static_cast<int>(std::lround(tx)), static_cast<int>(std::lround(ty))};

            const auto acceptable = [&](Coord c) {
                if (c.i < 0 || c.j < 0 || c.i >= size_g || c.j >= size_g) return false;
                if (used[cell_index(c)]) return false;
                const double d = radial_difficulty(c, size_g);
                if (d > st.radius || d > opts.max_radius) return false;
                if (st.index > 1) {
                    if (d <= inner) return false;
                    if (!detail::window_clears_radius(c, opts.window_radius, size_g, inner)) return false;
                }
                return true;
            };

            // Outward ring scan around the rounded target; nearest to the
            // exact target wins within the first ring that has a free cell.
            bool placed = false;
            for (int ring = 0; ring <= size_g && !placed; ++ring) {
                double best_dist = 0.0;
                Coord best{};
                bool found = false;
                for (int di = -ring; di <= ring; ++di) {
                    for (int dj = -ring; dj <= ring; ++dj) {
                        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                        const Coord c{base.i + di, base.j + dj};
                        if (!acceptable(c)) continue;
                        const double dist = std::hypot(c.i - tx, c.j - ty);
                        if (!found || dist < best_dist) {
                            best = c;
                            best_dist = dist;
                            found = true;
                        }
                    }
                }
                if (found) {
                    used[cell_index(best)] = 1;
                    map.entries.push_back({k, best, st.index, target_r, radial_difficulty(best, size_g)});
                    placed = true;
                }
            }
            if (!placed) throw std::runtime_error("build_move_map: cannot place move injectively");
        }
    }
    return map;
}

struct ComposerConfig {
    int window_radius = 1;
    int tau_green = 4;

    void validate() const {
        if (window_radius < 0) throw std::invalid_argument("ComposerConfig: window_radius must be >= 0");
        const int side = 2 * window_radius + 1;
        if (tau_green < 1 || tau_green > side * side)
            throw std::invalid_argument("ComposerConfig: tau_green must be in [1, (2w+1)^2]");
    }
};

/// Success agents in the (clipped) Chebyshev window around the move's cell.
inline int green_count(const PixelGrid& grid, Coord center, int window_radius) {
    int count = 0;
    for (int di = -window_radius; di <= window_radius; ++di) {
        for (int dj = -window_radius; dj <= window_radius; ++dj) {
            const Coord c{center.i + di, center.j + dj};
            if (grid.in_bounds(c) && grid.at(c).state == AgentState::Success) ++count;
        }
    }
    return count;
}

inline bool move_complete(const PixelGrid& grid, const MoveMapEntry& entry, const ComposerConfig& cfg) {
    if (!grid.in_bounds(entry.coord)) throw std::out_of_range("move_complete: cell outside the grid");
    return green_count(grid, entry.coord, cfg.window_radius) >= cfg.tau_green;
}

struct ComposerStep {
    std::vector<int> completed;
    HanoiState state;
    std::vector<MoveError> errors;
    int next_move_index = 0;
};

/// Completes moves strictly in order starting at next_move_index, replaying
/// the reference sequence against the puzzle state. Stops at the first
/// incomplete move, or after max_completions moves when that is >= 0.
/// Puzzle errors are reported, never dropped.
inline ComposerStep composer_step(const PixelGrid& grid, const MoveMap& map, const HanoiState& hanoi,
                                  int next_move_index, std::span<const MoveSpec> reference,
                                  const ComposerConfig& cfg, int max_completions = -1) {
    if (next_move_index < 0 || next_move_index > static_cast<int>(map.size()))
        throw std::out_of_range("composer_step: next_move_index outside 0..M");
    if (reference.size() != map.size())
        throw std::invalid_argument("composer_step: reference sequence length differs from move map");

    ComposerStep out;
    out.state = hanoi;
    out.next_move_index = next_move_index;
    while (out.next_move_index < static_cast<int>(map.size())) {
        if (max_completions >= 0 && static_cast<int>(out.completed.size()) >= max_completions) break;
        const auto& entry = map[static_cast<std::size_t>(out.next_move_index)];
        if (!move_complete(grid, entry, cfg)) break;
        auto r = apply_move(out.state, reference[static_cast<std::size_t>(out.next_move_index)]);
        if (auto* err = std::get_if<MoveError>(&r)) {
            out.errors.push_back(*err);
            break;
        }
        out.state = std::move(std::get<HanoiState>(r));
        out.completed.push_back(out.next_move_index);
        ++out.next_move_index;
    }
    return out;
}

}  // namespace pixelswarm
