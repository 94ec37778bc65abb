#include <gtest/gtest.h>

#include <pixelswarm/hanoi.hpp>
#include <pixelswarm/hanoi_bruteforce.hpp>

using namespace pixelswarm;

TEST(Hanoi, NewStateStacksAllDisksOnFirstPeg) {
    const auto s = new_state(3);
    EXPECT_EQ(s.peg(1), (std::vector<int>{3, 2, 1}));
    EXPECT_TRUE(s.peg(2).empty());
    EXPECT_TRUE(s.peg(3).empty());
    EXPECT_TRUE(s.invariants_hold());
    EXPECT_FALSE(is_solved(s));
}

TEST(Hanoi, NewStateRejectsZeroDisks) { EXPECT_THROW(new_state(0), std::invalid_argument); }

TEST(Hanoi, LegalMoveOfSmallestDisk) {
    const auto r = apply_move(new_state(3), {1, 1, 3});
    ASSERT_TRUE(std::holds_alternative<HanoiState>(r));
    const auto& s = std::get<HanoiState>(r);
    EXPECT_EQ(s.peg(1), (std::vector<int>{3, 2}));
    EXPECT_EQ(s.peg(3), (std::vector<int>{1}));
}

TEST(Hanoi, RejectsBuriedDisk) {
    const auto r = apply_move(new_state(3), {2, 1, 2});
    ASSERT_TRUE(std::holds_alternative<MoveError>(r));
    EXPECT_EQ(std::get<MoveError>(r), MoveError::NonTopDisk);
}

TEST(Hanoi, RejectsLargerOnSmaller) {
    auto s = std::get<HanoiState>(apply_move(new_state(3), {1, 1, 2}));
    const auto r = apply_move(s, {2, 1, 2});
    ASSERT_TRUE(std::holds_alternative<MoveError>(r));
    EXPECT_EQ(std::get<MoveError>(r), MoveError::LargerOnSmaller);
}

TEST(Hanoi, RejectsNullAndMismatchedSource) {
    EXPECT_EQ(std::get<MoveError>(apply_move(new_state(2), {1, 1, 1})), MoveError::NullMove);
    EXPECT_EQ(std::get<MoveError>(apply_move(new_state(2), {1, 2, 3})), MoveError::SourceMismatch);
}

TEST(Hanoi, OutOfRangeIndicesAreProgrammerErrors) {
    EXPECT_THROW(apply_move(new_state(2), {1, 0, 2}), std::invalid_argument);
    EXPECT_THROW(apply_move(new_state(2), {3, 1, 2}), std::invalid_argument);
}

TEST(Hanoi, ApplyMoveNeverMutatesInput) {
    const auto s = new_state(4);
    const auto copy = s;
    (void)apply_move(s, {1, 1, 2});
    (void)apply_move(s, {4, 1, 2});
    EXPECT_EQ(s, copy);
}

TEST(Hanoi, SmallReferenceSolutions) {
    EXPECT_EQ(solve_reference(1), (std::vector<MoveSpec>{{1, 1, 3}}));
    EXPECT_EQ(solve_reference(2), (std::vector<MoveSpec>{{1, 1, 2}, {2, 1, 3}, {1, 2, 3}}));
}

TEST(Hanoi, ReferenceLengthAndValidityUpToTen) {
    for (int n = 1; n <= 10; ++n) {
        const auto seq = solve_reference(n);
        EXPECT_EQ(seq.size(), (std::size_t{1} << n) - 1) << "n=" << n;
        const auto rep = validate_sequence(n, seq);
        EXPECT_TRUE(rep.valid) << "n=" << n;
        EXPECT_FALSE(rep.first_error_index.has_value());
        EXPECT_TRUE(is_solved(rep.final_state));
    }
}

TEST(Hanoi, ValidateReportsFirstBadMove) {
    auto seq = solve_reference(3);
    seq[3] = {2, 2, 3};  // disk 2 sits under disk 1 at that point
    const auto rep = validate_sequence(3, seq);
    EXPECT_FALSE(rep.valid);
    ASSERT_TRUE(rep.first_error_index.has_value());
    EXPECT_EQ(*rep.first_error_index, 3u);
    EXPECT_EQ(*rep.error, MoveError::NonTopDisk);
}

TEST(Hanoi, IncompleteSequenceIsNotValid) {
    auto seq = solve_reference(3);
    seq.pop_back();
    const auto rep = validate_sequence(3, seq);
    EXPECT_FALSE(rep.valid);
    EXPECT_FALSE(rep.first_error_index.has_value());
}

TEST(Hanoi, InvariantsHoldAlongEveryReferencePrefix) {
    for (int n = 1; n <= 6; ++n) {
        auto s = new_state(n);
        for (const auto& m : solve_reference(n)) {
            s = std::get<HanoiState>(apply_move(s, m));
            ASSERT_TRUE(s.invariants_hold());
        }
    }
}

TEST(Hanoi, BruteForceAgreesOnAllReachableStates) {
    for (int n = 1; n <= 4; ++n) {
        const auto rep = brute_force_check(n);
        std::size_t states = 1;
        for (int i = 0; i < n; ++i) states *= 3;
        EXPECT_EQ(rep.states_visited, states) << "every assignment is reachable";
        EXPECT_EQ(rep.moves_checked, states * static_cast<std::size_t>(n) * 9);
        EXPECT_EQ(rep.mismatches, 0u) << rep.first_mismatch;
    }
}
