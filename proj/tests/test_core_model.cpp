#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cnw/builtins.hpp"
#include "cnw/cost_space.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/map_system.hpp"

using namespace cnw;

namespace {

ExtendedLevel random_level(std::mt19937_64& rng) {
    const double mags[] = {0.0, 0.25, 0.5, 1.0, 2.0, 1e-300, 3.75, kInf};
    const double m = mags[rng() % 8];
    return rng() % 2 ? ExtendedLevel::neg(m) : ExtendedLevel::pos(m);
}

double signed_value(const ExtendedLevel& l) { return l.is_neg() ? -l.magnitude : l.magnitude; }

} // namespace

TEST(ExtendedLevel, MinusZeroBeforePlusZero) {
    EXPECT_TRUE(compare_levels(ExtendedLevel::minus_zero(), ExtendedLevel::plus_zero()) < 0);
    EXPECT_NE(ExtendedLevel::minus_zero(), ExtendedLevel::plus_zero());
}

TEST(ExtendedLevel, NegativeBranchReversesMagnitude) {
    EXPECT_TRUE(compare_levels(ExtendedLevel::neg(2), ExtendedLevel::neg(1)) < 0);
    EXPECT_TRUE(compare_levels(ExtendedLevel::pos(1), ExtendedLevel::infinity()) < 0);
    EXPECT_TRUE(compare_levels(ExtendedLevel::neg(0.5), ExtendedLevel::pos(100)) < 0);
}

TEST(ExtendedLevel, TotalOrderProperties) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 3000; ++i) {
        const auto a = random_level(rng), b = random_level(rng), c = random_level(rng);
        const auto ab = compare_levels(a, b), ba = compare_levels(b, a);
        EXPECT_EQ(ab < 0, ba > 0);
        EXPECT_EQ(ab == 0, a == b);
        if (ab <= 0 && compare_levels(b, c) <= 0) {
            EXPECT_TRUE(compare_levels(a, c) <= 0);
        }
        // off the split origin the order is the order of signed values
        if (!(a.magnitude == 0 && b.magnitude == 0) && signed_value(a) != signed_value(b)) {
            EXPECT_EQ(ab < 0, signed_value(a) < signed_value(b));
        }
    }
}

TEST(ExtendedLevel, TokensRoundTrip) {
    EXPECT_EQ(level_token(ExtendedLevel::minus_zero()), "-0");
    EXPECT_EQ(level_token(ExtendedLevel::plus_zero()), "+0");
    EXPECT_EQ(level_token(ExtendedLevel::infinity()), "inf");
    EXPECT_EQ(level_token(ExtendedLevel::neg(0.5)), "-0.5");
    EXPECT_EQ(level_token(ExtendedLevel::pos(1.25)), "1.25");
    EXPECT_EQ(level_token(ExtendedLevel::pos(0.1 + 0.2)), "0.30000000000000004");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const double m = std::ldexp(static_cast<double>(rng() % 100000 + 1), -static_cast<int>(rng() % 40));
        for (auto l : {ExtendedLevel::neg(m), ExtendedLevel::pos(m)}) EXPECT_EQ(parse_level_token(level_token(l)), l);
    }
    EXPECT_THROW(parse_level_token("abc"), SpecError);
    EXPECT_THROW(parse_level_token("0"), SpecError);
    EXPECT_THROW(parse_level_token("1.5x"), SpecError);
}

TEST(CostSpace, EuclideanGridIsMetric) {
    const auto s = CostSpace::euclidean(1, {0.0, 0.5, 1.0, 2.5});
    const auto v = validate_cost_space(s);
    EXPECT_TRUE(v.non_degenerate);
    EXPECT_TRUE(v.symmetric);
    EXPECT_TRUE(v.triangle);
    EXPECT_TRUE(s.is_metric());
    EXPECT_DOUBLE_EQ(s.cost(0, 3), 2.5);
}

TEST(CostSpace, DegenerateWitness) {
    const auto s = CostSpace::explicit_costs(2, {0, 0, 0, 0});
    const auto v = validate_cost_space(s);
    EXPECT_FALSE(v.non_degenerate);
    EXPECT_FALSE(s.is_non_degenerate());
    ASSERT_TRUE(v.degenerate_witness);
    EXPECT_EQ(v.degenerate_witness->a, 0u);
    EXPECT_EQ(v.degenerate_witness->b, 1u);
}

TEST(CostSpace, TriangleWitness) {
    // c(a,c) = 5 > c(a,b) + c(b,c) = 2
    const auto s = CostSpace::explicit_costs(3, {0, 1, 5, 1, 0, 1, 5, 1, 0});
    const auto v = validate_cost_space(s);
    EXPECT_TRUE(v.non_degenerate);
    EXPECT_TRUE(v.symmetric);
    EXPECT_FALSE(v.triangle);
    EXPECT_FALSE(s.is_metric());
    ASSERT_TRUE(v.triangle_witness);
    EXPECT_EQ(v.triangle_witness->a, 0u);
    EXPECT_EQ(v.triangle_witness->b, 1u);
    EXPECT_EQ(v.triangle_witness->c, 2u);
}

TEST(CostSpace, RejectsBadMatrices) {
    EXPECT_THROW(CostSpace::explicit_costs(2, {0, 1, 1}), SpecError);
    EXPECT_THROW(CostSpace::explicit_costs(2, {1, 1, 1, 0}), SpecError);
    EXPECT_THROW(CostSpace::explicit_costs(2, {0, -1, 1, 0}), SpecError);
    EXPECT_THROW(CostSpace::explicit_costs(2, {0, NAN, 1, 0}), SpecError);
    EXPECT_NO_THROW(CostSpace::explicit_costs(2, {0, kInf, 1, 0}));
}

TEST(CostSpace, AsymmetricInfiniteCosts) {
    const auto s = CostSpace::explicit_costs(2, {0, kInf, 1, 0});
    EXPECT_FALSE(s.is_symmetric());
    EXPECT_TRUE(s.is_non_degenerate());
    EXPECT_EQ(s.cost(0, 1), kInf);
}

TEST(GridSystem, ThreePointDoubling) {
    const auto sys = build_grid_system("f2", GridSpec{{{-1, 1}}, 1.0}, 4);
    ASSERT_EQ(sys.size(), 3u);
    EXPECT_EQ(sys.space().point(0)[0], -1.0);
    EXPECT_EQ(sys.space().point(1)[0], 0.0);
    EXPECT_EQ(sys.space().point(2)[0], 1.0);
    EXPECT_EQ(sys.trajectories().position(0, 1)[0], -2.0);
    EXPECT_EQ(sys.trajectories().position(1, 1)[0], 0.0);
    EXPECT_EQ(sys.trajectories().position(2, 1)[0], 2.0);
    // raw iterates, never snapped back to the grid
    EXPECT_EQ(sys.trajectories().position(2, 4)[0], 16.0);
}

TEST(GridSystem, SinglePointFixed) {
    const auto sys = build_grid_system("f_half", GridSpec{{{0, 0}}, 1.0}, 4);
    ASSERT_EQ(sys.size(), 1u);
    for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(sys.trajectories().position(0, n)[0], 0.0);
}

TEST(GridSystem, SampleCountAndExactPoints) {
    const GridSpec g{{{-5, 5}}, 0.01};
    EXPECT_EQ(grid_sample_count(g), 1001u);
    const auto pts = make_grid(g);
    ASSERT_EQ(pts.size(), 1001u);
    EXPECT_EQ(pts[500], 0.0);
    EXPECT_EQ(pts.front(), -5.0);
    EXPECT_EQ(pts.back(), 5.0);
    EXPECT_EQ(pts, make_grid(g)); // deterministic
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1], pts[i]);
}

TEST(GridSystem, NonMultipleRangeKeepsEndpoint) {
    const auto pts = make_grid(GridSpec{{{0, 1}}, 0.3});
    ASSERT_EQ(pts.size(), 5u);
    EXPECT_EQ(pts.back(), 1.0);
    EXPECT_EQ(grid_sample_count(GridSpec{{{0, 1}}, 0.3}), 5u);
}

TEST(GridSystem, TwoDimensionalLexicographic) {
    const auto pts = make_grid(GridSpec{{{0, 1}, {0, 2}}, 1.0});
    ASSERT_EQ(pts.size(), 12u); // 2 x 3 points
    EXPECT_EQ(pts[0], 0.0);
    EXPECT_EQ(pts[1], 0.0);
    EXPECT_EQ(pts[2], 0.0);
    EXPECT_EQ(pts[3], 1.0);
    EXPECT_EQ(pts[10], 1.0);
    EXPECT_EQ(pts[11], 2.0);
}

TEST(GridSystem, RejectsOversizedGrid) {
    try {
        make_grid(GridSpec{{{0, 1}}, 1e-7});
        FAIL() << "expected a resource error";
    } catch (const ResourceLimitError& e) {
        EXPECT_NE(std::string(e.what()).find("spacing"), std::string::npos);
    }
    EXPECT_THROW(make_grid(GridSpec{{{0, 1}}, 0.0}), SpecError);
    EXPECT_THROW(make_grid(GridSpec{{{1, 0}}, 0.1}), SpecError);
    EXPECT_THROW(build_grid_system("nope", GridSpec{{{0, 1}}, 0.1}, 4), SpecError);
}

TEST(TrajectoryStore, TabulatedMatchesRepeatedApplication) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 9;
        std::vector<std::uint32_t> table(n);
        for (auto& v : table) v = static_cast<std::uint32_t>(rng() % n);
        std::vector<double> coords(n);
        for (std::size_t i = 0; i < n; ++i) coords[i] = static_cast<double>(i);
        const std::size_t horizon = 1 + rng() % 20;
        const auto sys = MapSystem::tabulated(CostSpace::euclidean(1, coords), table, horizon);
        ASSERT_EQ(sys.trajectories().length(), horizon);
        for (std::size_t z = 0; z < n; ++z) {
            std::size_t w = z;
            for (std::size_t k = 1; k <= horizon; ++k) {
                w = table[w];
                EXPECT_EQ(sys.trajectories().id(z, k), w);
            }
        }
    }
}

TEST(MapSystem, RejectsBadTables) {
    const auto s = CostSpace::euclidean(1, {0, 1});
    EXPECT_THROW(MapSystem::tabulated(s, {0, 2}, 4), SpecError);
    EXPECT_THROW(MapSystem::tabulated(s, {0}, 4), SpecError);
    EXPECT_THROW(MapSystem::tabulated(s, {0, 1}, 0), SpecError);
}
