#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cnw/builtins.hpp"
#include "cnw/filtration.hpp"
#include "oracles.hpp"

using namespace cnw;

namespace {

constexpr double kH = 0.01;

std::size_t at(const MapSystem& sys, double x) { return sys.space().nearest(std::vector<double>{x}); }

std::size_t planar_index(const MapSystem& sys, double px, double py) {
    return sys.space().nearest(std::vector<double>{px, py});
}

LevelSummary grid_summary(const MapSystem& sys) {
    MatrixOptions opt;
    opt.use_spatial_index = true;
    return summarize(level_matrix(sys, opt), 2 * kH);
}

} // namespace

TEST(Registry, Evaluators) {
    EXPECT_EQ(builtin("f2").evaluate(3.0), 6.0);
    EXPECT_EQ(builtin("f_half").evaluate(3.0), 1.5);
    EXPECT_EQ(builtin("f_rep").evaluate(-1.0), -1.0);
    EXPECT_EQ(builtin("f_rep").evaluate(1.0), 2.0);
    EXPECT_EQ(builtin("flow_att").evaluate(2.0), -2.0);
    EXPECT_EQ(builtin("flow_att").evaluate(-2.0), 0.0);
    EXPECT_EQ(builtin("flow_Z").evaluate(2.0), -2.0);
    EXPECT_EQ(builtin("flow_Y").evaluate(2.0), 2.0);
    EXPECT_EQ(builtin("identity").evaluate(0.7), 0.7);
}

TEST(Registry, NamesAndKinds) {
    const auto names = builtin_names();
    for (const char* n : {"f2", "f_half", "f_rep", "f_att", "identity", "counterexample_s8", "flow_Z", "flow_Y",
                          "flow_rep", "flow_att", "translation_flow"})
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    EXPECT_EQ(builtin("flow_Z").kind, SystemKind::Semiflow);
    EXPECT_EQ(builtin("f2").kind, SystemKind::Map);
    EXPECT_TRUE(builtin("counterexample_s8").tabulated);
    EXPECT_THROW(builtin("f3"), SpecError);
    EXPECT_THROW(build_grid_system("flow_Z", GridSpec{{{-1, 1}}, 0.1}, 4), SpecError);
    EXPECT_THROW(build_grid_system("counterexample_s8", GridSpec{{{-1, 1}}, 0.1}, 4), SpecError);
    EXPECT_THROW(build_flow_system("f2", GridSpec{{{-1, 1}}, 0.1}, {}), SpecError);
}

TEST(Analytic, Examples) {
    EXPECT_DOUBLE_EQ(analytic_level("f2", 3.0), 1.0);
    EXPECT_DOUBLE_EQ(analytic_level("f_half", -1.5), 0.5);
    EXPECT_EQ(analytic_level("f_rep", -2.0), 0.0);
    EXPECT_DOUBLE_EQ(analytic_level("f_rep", 3.0), 1.0);
    EXPECT_EQ(analytic_level("flow_Z", -2.0), 2.0);
    EXPECT_EQ(analytic_robustness("f_rep", -1.0), 1.0);
    EXPECT_FALSE(analytic_robustness("f_rep", 1.0));
    EXPECT_EQ(analytic_robustness("f_half", 0.0), kInf);
    EXPECT_EQ(analytic_robustness("f2", 0.0), 0.0);
    EXPECT_EQ(analytic_robustness("f_att", -3.0), kInf);
    EXPECT_EQ(analytic_robustness("identity", 4.0), kInf);
    EXPECT_THROW(analytic_level("nope", 0.0), SpecError);
    EXPECT_THROW(analytic_level("flow_Y", 0.0), SpecError);
    EXPECT_THROW(analytic_robustness("translation_flow", 0.0), SpecError);
}

TEST(Analytic, GridLevelsTrackClosedForms) {
    // Contracting branches reach x from z = 4x/3, which leaves the box for |x| > 3.75.
    const std::pair<const char*, double> cases[] = {{"f2", 4.99}, {"f_half", 3.75}, {"f_rep", 4.99}, {"f_att", 3.75}};
    for (const auto& [name, reach] : cases) {
        const auto sys = build_grid_system(name, GridSpec{{{-5, 5}}, kH}, 64);
        const auto s = grid_summary(sys);
        double worst = 0.0;
        for (std::size_t i = 0; i < sys.size(); ++i) {
            const double x = sys.space().point(i)[0];
            if (std::fabs(x) > reach) continue;
            worst = std::max(worst, std::fabs(s.lambda[i] - analytic_level(name, x)));
        }
        EXPECT_LE(worst, 3 * kH) << name;
    }
}

TEST(Analytic, GridRobustnessTracksClosedForms) {
    const auto rep = build_grid_system("f_rep", GridSpec{{{-5, 5}}, kH}, 64);
    const auto s = grid_summary(rep);
    for (double x = -4.9; x <= -0.1; x += 0.2) {
        const auto b = s.beta[at(rep, x)];
        ASSERT_TRUE(b) << x;
        EXPECT_NEAR(*b, *analytic_robustness("f_rep", x), 3 * kH) << x;
    }
    const auto att = build_grid_system("f_att", GridSpec{{{-5, 5}}, kH}, 64);
    const auto sa = grid_summary(att);
    for (double x = -4.9; x <= -0.1; x += 0.2) EXPECT_EQ(sa.beta[at(att, x)], kInf) << x;
    const auto half = build_grid_system("f_half", GridSpec{{{-5, 5}}, kH}, 64);
    EXPECT_EQ(grid_summary(half).beta[at(half, 0.0)], kInf);
}

TEST(Analytic, DoublingNegativeBranchCollapses) {
    const auto sys = build_grid_system("f2", GridSpec{{{-5, 5}}, kH}, 64);
    const auto s = grid_summary(sys);
    EXPECT_TRUE(omega_membership(s, at(sys, 0.0), ExtendedLevel::minus_zero()));
    for (double d : {2 * kH, 0.05, 0.5, 3.0})
        EXPECT_TRUE(diagram(s, {ExtendedLevel::neg(d)})[0].members.empty()) << d;
}

TEST(Counterexample, MapExamples) {
    const auto sys = counterexample_s8(10, 10);
    ASSERT_EQ(sys.size(), 10u + 9u * 10u);
    const auto p = planar_index(sys, 1.0, 0.0);
    EXPECT_EQ(p, 0u);
    EXPECT_EQ(sys.trajectories().id(planar_index(sys, 0.5, 1.0), 1), p);
    EXPECT_EQ(sys.trajectories().id(planar_index(sys, 0.5, 1.0 / 3), 1), planar_index(sys, 1.0 / 3, 0.5));
    EXPECT_EQ(sys.trajectories().id(p, 1), planar_index(sys, 0.5, 0.0));
    const auto last = planar_index(sys, 0.1, 0.0);
    EXPECT_EQ(sys.trajectories().id(last, 1), last);
    EXPECT_EQ(sys.horizon(), counterexample_horizon(10, 10));
    EXPECT_THROW(counterexample_s8(1, 5), SpecError);
}

TEST(Counterexample, MatchesLabelOracle) {
    const std::size_t n_max = 8, m_max = 6;
    const auto sys = counterexample_s8(n_max, m_max);
    const auto m = level_matrix(sys);
    const oracle::PlanarExample ex{n_max, m_max};
    const auto labels = ex.labels();
    ASSERT_EQ(labels.size(), sys.size());
    for (std::size_t x = 0; x < labels.size(); ++x)
        for (std::size_t y = 0; y < labels.size(); ++y)
            ASSERT_NEAR(m(x, y), ex.link(labels[x], labels[y], sys.horizon()), 1e-12) << x << "," << y;
}

TEST(Counterexample, BaseLevelAndShrinkingReturn) {
    double prev = kInf;
    for (std::size_t m_max : {10u, 20u}) {
        const auto sys = counterexample_s8(m_max, m_max);
        const auto mat = level_matrix(sys);
        EXPECT_NEAR(mat(0, 0), 0.5, 0.01);
        double worst = 0.0;
        for (std::size_t k = 1; k <= sys.horizon(); ++k) worst = std::max(worst, mat(sys.trajectories().id(0, k), 0));
        EXPECT_LE(worst, 1.2 / static_cast<double>(m_max));
        EXPECT_LT(worst, prev);
        prev = worst;
    }
}
