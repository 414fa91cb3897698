#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "swarmsim/assignment.hpp"

using namespace swarmsim;
using testing_support::brute_force_min;

namespace {

CostMatrix random_matrix(std::mt19937_64& gen, std::size_t n, double hi = 10.0) {
    std::uniform_real_distribution<double> d(0.0, hi);
    CostMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = d(gen);
    return c;
}

}  // namespace

TEST(Solve, IdentityFavoring) {
    const auto a = solve(CostMatrix::from_rows({{0, 5}, {5, 0}}));
    EXPECT_EQ(a.permutation, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Solve, SwapCase) {
    const double r2 = std::sqrt(2.0);
    const auto a = solve(CostMatrix::from_rows({{r2, 0}, {0, r2}}));
    EXPECT_EQ(a.permutation, (std::vector<std::size_t>{1, 0}));
    EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Solve, EmptyAndSingle) {
    EXPECT_TRUE(solve(CostMatrix(0)).permutation.empty());
    const auto a = solve(CostMatrix::from_rows({{3.5}}));
    EXPECT_EQ(a.permutation, std::vector<std::size_t>{0});
    EXPECT_EQ(a.total_cost, 3.5);
}

TEST(Solve, TiesResolveToIdentity) {
    CostMatrix c(5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) c(i, j) = 1.0;
    EXPECT_EQ(solve(c).permutation, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Solve, MatchesExhaustiveUpToEight) {
    std::mt19937_64 gen(2024);
    for (std::size_t n = 1; n <= 8; ++n) {
        const int trials = n <= 6 ? 100 : 20;
        for (int t = 0; t < trials; ++t) {
            const auto c = random_matrix(gen, n);
            const auto a = solve(c);
            ASSERT_TRUE(is_permutation(a.permutation));
            EXPECT_NEAR(a.total_cost, assignment_cost(c, a.permutation), 1e-9);
            EXPECT_NEAR(a.total_cost, brute_force_min(c), 1e-9) << "n=" << n << " trial " << t;
        }
    }
}

TEST(Solve, RowShiftKeepsOptimality) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> shift(0.0, 20.0);
    for (int t = 0; t < 100; ++t) {
        auto c = random_matrix(gen, 6);
        const auto before = solve(c);
        const std::size_t row = t % 6;
        const double s = shift(gen);
        for (std::size_t j = 0; j < 6; ++j) c(row, j) += s;
        const auto after = solve(c);
        EXPECT_NEAR(after.total_cost, brute_force_min(c), 1e-9);
        EXPECT_NEAR(assignment_cost(c, before.permutation), after.total_cost, 1e-9);
    }
}

TEST(Solve, IntegerCostsWithManyTies) {
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<int> d(0, 3);
    for (int t = 0; t < 100; ++t) {
        CostMatrix c(6);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) c(i, j) = d(gen);
        EXPECT_EQ(solve(c).total_cost, brute_force_min(c));
    }
}

TEST(Solve, HundredByHundredIsFast) {
    std::mt19937_64 gen(1);
    const auto c = random_matrix(gen, 100);
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = solve(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_TRUE(is_permutation(a.permutation));
    EXPECT_LT(secs, 1.0);
}

TEST(MaxWeight, NegatedMatrixGivesSamePermutation) {
    std::mt19937_64 gen(77);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + t % 7;
        const auto c = random_matrix(gen, n);
        std::vector<std::vector<double>> neg(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) neg[i][j] = -c(i, j);
        const auto mx = solve_max_weight(neg);
        EXPECT_EQ(mx.permutation, solve(c).permutation);
        EXPECT_NEAR(mx.total_cost, -solve(c).total_cost, 1e-9);
    }
}

TEST(CostMatrixBuild, HandDistances) {
    const FormationSpec target{"t", {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}}};
    const std::vector<Vec3> positions{{7, 7, 7}, {8, 7, 7}, {7, 8, 7}};
    const auto p = build_cost_matrix(positions, 0, target);
    const double r2 = std::sqrt(2.0);
    EXPECT_EQ(p.followers, (std::vector<AgentId>{1, 2}));
    EXPECT_EQ(p.slots, (std::vector<std::size_t>{1, 2}));
    EXPECT_NEAR(p.cost(0, 0), r2, 1e-15);
    EXPECT_EQ(p.cost(0, 1), 0.0);
    EXPECT_EQ(p.cost(1, 0), 0.0);
    EXPECT_NEAR(p.cost(1, 1), r2, 1e-15);
}

TEST(CostMatrixBuild, OnSlotsGivesZeroDiagonal) {
    const auto cube = *find_builtin(9, "cube");
    std::vector<Vec3> pos;
    for (const auto& o : cube.offsets) pos.push_back(Vec3(3, -2, 10) + o);
    const auto p = build_cost_matrix(pos, 0, cube);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(p.cost(i, i), 0.0, 1e-12);
}

TEST(CostMatrixBuild, NonNegativeForRandomInput) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> d(-30, 30);
    const auto pyr = *find_builtin(9, "pyramid");
    for (int t = 0; t < 50; ++t) {
        std::vector<Vec3> pos;
        for (int k = 0; k < 9; ++k) pos.emplace_back(d(gen), d(gen), d(gen));
        const auto p = build_cost_matrix(pos, t % 9, pyr);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) EXPECT_GE(p.cost(i, j), 0.0);
    }
}

TEST(Reconfigure, SameFormationIsIdentity) {
    const auto dia = *find_builtin(6, "diamond");
    std::vector<Vec3> pos;
    for (const auto& o : dia.offsets) pos.push_back(Vec3(1, 1, 10) + o);
    const auto r = reconfigure(dia, pos, 0);
    const auto& table = std::get<AssignmentTable>(r);
    EXPECT_NEAR(table.total_cost, 0.0, 1e-12);
    const auto slots = table.slots_by_agent(6);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(slots[i], i);
}

TEST(Reconfigure, TToDiamondBeatsIdentity) {
    const auto t = *find_builtin(6, "T");
    const auto dia = *find_builtin(6, "diamond");
    const auto r = reconfigure(dia, t.offsets, 0);
    const auto& table = std::get<AssignmentTable>(r);
    const auto p = build_cost_matrix(t.offsets, 0, dia);
    std::vector<std::size_t> ident(5);
    std::iota(ident.begin(), ident.end(), 0);
    EXPECT_LE(table.total_cost, assignment_cost(p.cost, ident) + 1e-12);
    EXPECT_NEAR(table.total_cost, brute_force_min(p.cost), 1e-12);
    // Leader stays on the origin.
    EXPECT_EQ(table.entries.front().agent, 0u);
    EXPECT_EQ(table.entries.front().offset, Vec3::Zero());
}

TEST(Reconfigure, OriginToCubeIsExhaustivelyOptimal) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    const auto cube = *find_builtin(9, "cube");
    std::vector<Vec3> pos;
    for (int k = 0; k < 9; ++k) pos.emplace_back(d(gen), d(gen), d(gen));
    const auto table = std::get<AssignmentTable>(reconfigure(cube, pos, 0));
    EXPECT_NEAR(table.total_cost, brute_force_min(build_cost_matrix(pos, 0, cube).cost), 1e-9);
}

TEST(Reconfigure, LeaderCanBeAnyAgent) {
    const auto cube = *find_builtin(9, "cube");
    std::vector<Vec3> pos;
    for (const auto& o : cube.offsets) pos.push_back(o);
    std::swap(pos[0], pos[4]);  // agent 4 sits on the origin
    const auto table = std::get<AssignmentTable>(reconfigure(cube, pos, 4));
    const auto offs = table.offsets_by_agent(9);
    EXPECT_EQ(offs[4], Vec3::Zero());
    EXPECT_NEAR(table.total_cost, 0.0, 1e-12);
}

TEST(Reconfigure, SizeMismatchIsRejected) {
    const auto cube = *find_builtin(9, "cube");
    std::vector<Vec3> six(6, Vec3::Zero());
    const auto r = reconfigure(cube, six, 0);
    ASSERT_TRUE(std::holds_alternative<ReconfigureRejected>(r));
    EXPECT_FALSE(std::get<ReconfigureRejected>(r).reason.empty());
}

TEST(Reconfigure, IdentityAssignmentLayout) {
    const auto t = *find_builtin(6, "T");
    const auto table = identity_assignment(t, 6, 2);
    const auto offs = table.offsets_by_agent(6);
    EXPECT_EQ(offs[2], Vec3::Zero());
    EXPECT_EQ(offs[0], t.offsets[1]);
    EXPECT_EQ(offs[1], t.offsets[2]);
    EXPECT_EQ(offs[3], t.offsets[3]);
    EXPECT_THROW(identity_assignment(t, 9, 0), ConfigError);
}
