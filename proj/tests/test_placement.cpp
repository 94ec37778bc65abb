#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include <pixelswarm/placement.hpp>

using namespace pixelswarm;

namespace {

// Walks the square spiral one unit step at a time: right 1, up 1, left 2,
// down 2, right 3, ... Independent of the closed form under test.
std::vector<Offset> ring_walk(int count) {
    std::vector<Offset> out{{0, 0}};
    int x = 0;
    int y = 0;
    const int dx[] = {1, 0, -1, 0};
    const int dy[] = {0, 1, 0, -1};
    int dir = 0;
    for (int len = 1; static_cast<int>(out.size()) < count; ++len) {
        for (int rep = 0; rep < 2 && static_cast<int>(out.size()) < count; ++rep) {
            for (int s = 0; s < len && static_cast<int>(out.size()) < count; ++s) {
                x += dx[dir];
                y += dy[dir];
                out.push_back({x, y});
            }
            dir = (dir + 1) % 4;
        }
    }
    return out;
}

int chebyshev(Offset o) { return std::max(std::abs(o.dx), std::abs(o.dy)); }

std::set<std::pair<int, int>> offsets_in(const std::vector<Offset>& v) {
    std::set<std::pair<int, int>> s;
    for (auto o : v) s.insert({o.dx, o.dy});
    return s;
}

}  // namespace

TEST(Spiral, Examples) {
    EXPECT_EQ(integer_spiral(0), (Offset{0, 0}));
    EXPECT_EQ(chebyshev(integer_spiral(8)), 1);
    EXPECT_EQ(chebyshev(integer_spiral(9)), 2);
    EXPECT_EQ(spiral_layer(8), 1);
    EXPECT_EQ(spiral_layer(9), 2);
}

TEST(Spiral, MatchesRingWalk) {
    const auto walk = ring_walk(5000);
    for (int k = 0; k < 5000; ++k) ASSERT_EQ(integer_spiral(k), walk[static_cast<std::size_t>(k)]) << "k=" << k;
}

TEST(Spiral, LayerEqualsChebyshevAndCoversRings) {
    std::vector<Offset> v;
    for (int k = 0; k < 2000; ++k) {
        const auto o = integer_spiral(k);
        ASSERT_EQ(chebyshev(o), spiral_layer(k));
        v.push_back(o);
    }
    EXPECT_EQ(offsets_in(v).size(), v.size());
    // the first (2L+1)^2 indices fill the square of half-width L exactly
    for (int layer = 0; layer <= 10; ++layer) {
        const int n = (2 * layer + 1) * (2 * layer + 1);
        for (int k = 0; k < n; ++k) ASSERT_LE(chebyshev(v[static_cast<std::size_t>(k)]), layer);
    }
}

TEST(Spiral, RejectsNegative) { EXPECT_THROW(integer_spiral(-1), std::invalid_argument); }

TEST(MoveMap, BandedDefaultHonoursStageBands) {
    const auto table = StageTable::defaults();
    const auto map = build_move_map(31, 64, MapMode::BandedSpiral, table);
    ASSERT_EQ(map.size(), 31u);
    for (const auto& e : map.entries) {
        const auto& st = table.stage(e.stage);
        EXPECT_EQ(e.stage, table.stage_of_move(e.k));
        EXPECT_NEAR(e.d, radial_difficulty(e.coord, 64), 1e-15);
        EXPECT_LE(e.d, st.radius) << "k=" << e.k;
        EXPECT_GT(e.d, table.inner_radius(e.stage)) << "k=" << e.k;
    }
    EXPECT_LE(map[0].d, 0.18);
    EXPECT_GE(map[30].d, 0.72);
}

TEST(MoveMap, BandedIsInjective) {
    const auto map = build_move_map(31, 64, MapMode::BandedSpiral, StageTable::defaults());
    std::set<std::pair<int, int>> cells;
    for (const auto& e : map.entries) cells.insert({e.coord.i, e.coord.j});
    EXPECT_EQ(cells.size(), 31u);
}

TEST(MoveMap, TargetsGrowWithinAndAcrossStages) {
    const auto map = build_move_map(31, 64, MapMode::BandedSpiral, StageTable::defaults());
    for (std::size_t k = 1; k < map.size(); ++k) {
        if (map[k].stage == map[k - 1].stage) EXPECT_GE(map[k].target_d, map[k - 1].target_d);
        else EXPECT_GT(map[k].target_d, map[k - 1].target_d);
    }
    EXPECT_NEAR(map[0].target_d, 0.02, 1e-12);
    EXPECT_NEAR(map[6].target_d, 0.18, 1e-12);
}

TEST(MoveMap, WindowsOfLaterStagesStayOutsideEarlierDiscs) {
    const auto table = StageTable::defaults();
    const auto map = build_move_map(31, 64, MapMode::BandedSpiral, table);
    for (const auto& e : map.entries) {
        if (e.stage == 1) continue;
        const double inner = table.inner_radius(e.stage);
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj)
                EXPECT_GT(radial_difficulty({e.coord.i + di, e.coord.j + dj}, 64), inner) << "k=" << e.k;
    }
}

TEST(MoveMap, BijectiveForLargeMoveCounts) {
    for (int m : {31, 100, 255, 1000}) {
        const auto map = build_move_map(m, 256, MapMode::BandedSpiral, StageTable::proportional(m));
        std::set<std::pair<int, int>> cells;
        for (const auto& e : map.entries) cells.insert({e.coord.i, e.coord.j});
        EXPECT_EQ(cells.size(), static_cast<std::size_t>(m));
    }
    const auto spiral = build_move_map(1000, 64, MapMode::IntegerSpiral, StageTable::proportional(1000));
    std::set<std::pair<int, int>> cells;
    for (const auto& e : spiral.entries) cells.insert({e.coord.i, e.coord.j});
    EXPECT_EQ(cells.size(), 1000u);
}

TEST(MoveMap, IntegerSpiralHugsTheCenter) {
    const auto map = build_move_map(31, 64, MapMode::IntegerSpiral, StageTable::defaults());
    for (const auto& e : map.entries) EXPECT_LT(e.d, 0.15);
}

TEST(MoveMap, FailsWhenTheDiscIsTooSmall) {
    EXPECT_THROW(build_move_map(31, 8, MapMode::BandedSpiral, StageTable::defaults()), std::runtime_error);
    EXPECT_THROW(build_move_map(30, 64, MapMode::BandedSpiral, StageTable::defaults()), std::invalid_argument);
}

TEST(MoveMap, JsonExport) {
    const auto j = build_move_map(31, 64, MapMode::BandedSpiral, StageTable::defaults()).to_json();
    EXPECT_EQ(j.at("mode"), "banded_spiral");
    ASSERT_EQ(j.at("moves").size(), 31u);
    for (const char* key : {"k", "x", "y", "stage", "target_d"}) EXPECT_TRUE(j.at("moves")[0].contains(key));
}

namespace {

PixelGrid grid_with_success(int g, std::initializer_list<Coord> greens) {
    PixelGrid grid(GridConfig{.size_g = g});
    for (auto c : greens) grid.at(c).state = AgentState::Success;
    return grid;
}

}  // namespace

TEST(Composer, WindowCountsAgainstThreshold) {
    const ComposerConfig cfg{1, 4};
    const MoveMapEntry e{0, {5, 5}, 1, 0.0, 0.0};
    auto five = grid_with_success(10, {{4, 4}, {4, 5}, {5, 5}, {6, 6}, {6, 4}});
    EXPECT_TRUE(move_complete(five, e, cfg));
    auto none = grid_with_success(10, {});
    EXPECT_FALSE(move_complete(none, e, {1, 1}));
    auto outside = grid_with_success(10, {{3, 3}, {7, 7}, {5, 7}, {7, 5}});
    EXPECT_FALSE(move_complete(outside, e, cfg));
}

TEST(Composer, ClippedWindowAtCorner) {
    // only 4 of the 9 cells exist around (0,0)
    auto g = grid_with_success(6, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const MoveMapEntry e{0, {0, 0}, 1, 0.0, 0.0};
    EXPECT_EQ(green_count(g, {0, 0}, 1), 4);
    EXPECT_TRUE(move_complete(g, e, {1, 4}));
    EXPECT_FALSE(move_complete(g, e, {1, 5}));
}

TEST(Composer, ConfigValidation) {
    EXPECT_THROW((ComposerConfig{1, 10}.validate()), std::invalid_argument);
    EXPECT_THROW((ComposerConfig{1, 0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((ComposerConfig{1, 9}.validate()));
}

namespace {

struct ComposerFixture : ::testing::Test {
    StageTable table = StageTable::defaults();
    MoveMap map = build_move_map(31, 64, MapMode::BandedSpiral, table);
    std::vector<MoveSpec> ref = solve_reference(5);
    PixelGrid grid{GridConfig{}};
    ComposerConfig cfg{};

    void light(int k) {
        const auto c = map[static_cast<std::size_t>(k)].coord;
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) grid.at({c.i + di, c.j + dj}).state = AgentState::Success;
    }
};

}  // namespace

TEST_F(ComposerFixture, SingleCompletion) {
    light(0);
    const auto step = composer_step(grid, map, new_state(5), 0, ref, cfg);
    EXPECT_EQ(step.completed, (std::vector<int>{0}));
    EXPECT_EQ(step.next_move_index, 1);
    EXPECT_EQ(step.state, std::get<HanoiState>(apply_move(new_state(5), ref[0])));
}

TEST_F(ComposerFixture, NoOpWhenWindowUnsatisfied) {
    const auto step = composer_step(grid, map, new_state(5), 0, ref, cfg);
    EXPECT_TRUE(step.completed.empty());
    EXPECT_EQ(step.state, new_state(5));
}

TEST_F(ComposerFixture, LaterMoveWaitsForEarlierOne) {
    const auto after7 = validate_sequence(5, std::vector<MoveSpec>(ref.begin(), ref.begin() + 7)).final_state;
    light(8);
    light(9);
    auto step = composer_step(grid, map, after7, 7, ref, cfg);
    EXPECT_TRUE(step.completed.empty());
    light(7);
    step = composer_step(grid, map, after7, 7, ref, cfg);
    // every move whose window is green is taken in one sweep, in order
    EXPECT_EQ(step.completed, (std::vector<int>{7, 8, 9}));
}

TEST_F(ComposerFixture, CapLimitsCompletionsPerCall) {
    for (int k = 0; k < 5; ++k) light(k);
    const auto step = composer_step(grid, map, new_state(5), 0, ref, cfg, 1);
    EXPECT_EQ(step.completed, (std::vector<int>{0}));
}

TEST_F(ComposerFixture, TerminalStepIsNoOp) {
    const auto solved = validate_sequence(5, ref).final_state;
    for (int k = 0; k < 31; ++k) light(k);
    const auto step = composer_step(grid, map, solved, 31, ref, cfg);
    EXPECT_TRUE(step.completed.empty());
    EXPECT_TRUE(is_solved(step.state));
}

TEST_F(ComposerFixture, SurfacesPuzzleErrors) {
    light(0);
    auto bad = ref;
    bad[0] = {5, 1, 3};
    const auto step = composer_step(grid, map, new_state(5), 0, bad, cfg);
    ASSERT_EQ(step.errors.size(), 1u);
    EXPECT_EQ(step.errors[0], MoveError::NonTopDisk);
    EXPECT_TRUE(step.completed.empty());
}

TEST_F(ComposerFixture, FullReplaySolvesThePuzzle) {
    for (int k = 0; k < 31; ++k) light(k);
    const auto step = composer_step(grid, map, new_state(5), 0, ref, cfg);
    EXPECT_EQ(step.completed.size(), 31u);
    EXPECT_TRUE(is_solved(step.state));
}
