#include <cmath>

#include <gtest/gtest.h>

#include <pixelswarm/grid.hpp>
#include <pixelswarm/stage_table.hpp>

using namespace pixelswarm;

TEST(Grid, CompetenceUpdateExamples) {
    EXPECT_DOUBLE_EQ(competence_update(0.0, 0.1), 0.1);
    EXPECT_DOUBLE_EQ(competence_update(0.5, 0.1), 0.55);
    EXPECT_DOUBLE_EQ(competence_update(1.0, 0.1), 1.0);
}

TEST(Grid, CompetenceClosedForm) {
    // 1 - c_m = (1 - eta)^m (1 - c_0)
    for (double c0 : {0.0, 0.3, 0.9}) {
        for (double eta : {0.05, 0.1, 0.5}) {
            double c = c0;
            for (int m = 1; m <= 50; ++m) {
                c = competence_update(c, eta);
                EXPECT_NEAR(1.0 - c, std::pow(1.0 - eta, m) * (1.0 - c0), 1e-12);
            }
        }
    }
}

TEST(Grid, CompetenceStaysInUnitIntervalAndIsMonotone) {
    double c = 0.0;
    for (int m = 0; m < 500; ++m) {
        const double next = competence_update(c, 0.1);
        ASSERT_GE(next, c);
        ASSERT_LE(next, 1.0);
        c = next;
    }
}

TEST(Grid, RecordFailureBumpsAttempts) {
    Agent a;
    a.attempts = 2;
    a.competence = 0.4;
    const auto b = record_failure(a);
    EXPECT_EQ(b.attempts, 3);
    EXPECT_EQ(b.state, AgentState::Failure);
    EXPECT_DOUBLE_EQ(b.competence, 0.4);
    EXPECT_EQ(a.attempts, 2);
}

TEST(Grid, PityBonus) {
    EXPECT_DOUBLE_EQ(pity_bonus(0, 0.05), 0.0);
    EXPECT_DOUBLE_EQ(pity_bonus(4, 0.05), 0.2);
}

TEST(Grid, RadialDifficultyExamples) {
    // center of a 64 grid is 31.5, so the nearest cells sit at sqrt(0.5)/32
    EXPECT_NEAR(radial_difficulty({31, 31}, 64), std::sqrt(0.5) / 32.0, 1e-15);
    EXPECT_NEAR(radial_difficulty({0, 0}, 64), 31.5 * std::sqrt(2.0) / 32.0, 1e-15);
    EXPECT_GT(radial_difficulty({0, 0}, 64), 1.0);
    EXPECT_NEAR(radial_difficulty({1, 1}, 3), 0.0, 1e-15);
}

TEST(Grid, DifficultyIsSymmetric) {
    const int g = 64;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double d = radial_difficulty({i, j}, g);
            ASSERT_DOUBLE_EQ(d, radial_difficulty({g - 1 - i, j}, g));
            ASSERT_DOUBLE_EQ(d, radial_difficulty({j, i}, g));
        }
}

TEST(Grid, EligibilityFollowsRadius) {
    EXPECT_TRUE(eligible({31, 31}, 0.18, 64));
    EXPECT_FALSE(eligible({0, 0}, 0.99, 64));
    EXPECT_TRUE(eligible({0, 31}, 0.99, 64));
}

TEST(Grid, EligibleSetsNestAcrossStages) {
    const auto table = StageTable::defaults();
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            for (int s = 1; s < table.num_stages(); ++s)
                if (eligible({i, j}, table.stage(s).radius, 64)) ASSERT_TRUE(eligible({i, j}, table.stage(s + 1).radius, 64));
}

TEST(Grid, ConstructionAndCounts) {
    PixelGrid g(GridConfig{});
    EXPECT_EQ(g.size(), 64);
    EXPECT_EQ(g.num_agents(), 4096u);
    const auto counts = g.state_counts();
    EXPECT_EQ(counts[0], 4096u);
    EXPECT_DOUBLE_EQ(g.mean_competence(), 0.0);
    EXPECT_EQ(g.at({3, 5}).coord, (Coord{3, 5}));
    EXPECT_EQ(g.index({3, 5}), 3u * 64 + 5);
}

TEST(Grid, StateCountsAlwaysSumToPopulation) {
    PixelGrid g(GridConfig{.size_g = 8});
    for (std::size_t i = 0; i < g.num_agents(); ++i) g[i].state = static_cast<AgentState>(i % kNumAgentStates);
    std::size_t total = 0;
    for (auto c : g.state_counts()) total += c;
    EXPECT_EQ(total, 64u);
}

TEST(Grid, ConfigValidation) {
    EXPECT_THROW(PixelGrid(GridConfig{.size_g = 1}), std::invalid_argument);
    EXPECT_THROW(PixelGrid(GridConfig{.eta = 0.0}), std::invalid_argument);
    EXPECT_THROW(PixelGrid(GridConfig{.eta = 1.5}), std::invalid_argument);
    EXPECT_THROW(PixelGrid(GridConfig{.alpha_pity = -1.0}), std::invalid_argument);
}

TEST(Grid, JsonShape) {
    PixelGrid g(GridConfig{.size_g = 4});
    g.at({0, 1}).state = AgentState::Success;
    const auto j = g.to_json();
    EXPECT_EQ(j.at("size"), 4);
    EXPECT_EQ(j.at("state").size(), 16u);
    EXPECT_EQ(j.at("state")[1], 3);
}

TEST(StageTable, DefaultsMatchTheCurriculumTable) {
    const auto t = StageTable::defaults();
    ASSERT_EQ(t.num_stages(), 4);
    EXPECT_EQ(t.num_moves(), 31);
    const double radii[] = {0.18, 0.45, 0.72, 0.99};
    const int firsts[] = {0, 7, 16, 25};
    const int lasts[] = {6, 15, 24, 30};
    for (int s = 1; s <= 4; ++s) {
        EXPECT_DOUBLE_EQ(t.stage(s).radius, radii[s - 1]);
        EXPECT_EQ(t.stage(s).first_move, firsts[s - 1]);
        EXPECT_EQ(t.stage(s).last_move, lasts[s - 1]);
        EXPECT_DOUBLE_EQ(t.stage(s).tau, 0.75);
    }
    EXPECT_EQ(t.stage_of_move(6), 1);
    EXPECT_EQ(t.stage_of_move(7), 2);
    EXPECT_EQ(t.stage_of_move(30), 4);
    EXPECT_EQ(t.stage_of_distance(0.18), 1);
    EXPECT_EQ(t.stage_of_distance(0.181), 2);
    EXPECT_EQ(t.stage_of_distance(1.2), 0);
}

TEST(StageTable, RejectsBrokenTables) {
    EXPECT_THROW(StageTable({{1, 0.5, 0.5, 0, 3, 0.75, "a"}, {2, 0.4, 0.4, 4, 6, 0.75, "b"}}), std::invalid_argument);
    EXPECT_THROW(StageTable({{1, 0.2, 0.2, 0, 3, 0.75, "a"}, {2, 0.4, 0.4, 5, 6, 0.75, "b"}}), std::invalid_argument);
    EXPECT_THROW(StageTable(std::vector<Stage>{}), std::invalid_argument);
}

TEST(StageTable, ProportionalSplitPartitionsMoves) {
    for (int m : {4, 7, 15, 31, 63, 255, 1000}) {
        const auto t = StageTable::proportional(m);
        EXPECT_EQ(t.num_moves(), m);
        EXPECT_NO_THROW(t.validate());
    }
    EXPECT_EQ(StageTable::proportional(31).stage(2).first_move, 7);
}
