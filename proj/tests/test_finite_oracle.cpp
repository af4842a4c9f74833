#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "cnw/finite_oracle.hpp"
#include "oracles.hpp"

using namespace cnw;

namespace {

FiniteInstance make(std::size_t n, std::vector<double> cost, std::vector<std::uint32_t> map) {
    FiniteInstance in;
    in.size = n;
    in.cost = std::move(cost);
    in.map = std::move(map);
    return in;
}

FiniteInstance two_point() { return make(2, {0, 1, 1, 0}, {1, 1}); }

using Set = std::vector<std::size_t>;

} // namespace

TEST(Definitional, TwoPointSlices) {
    const DefinitionalOracle o(two_point());
    EXPECT_EQ(o.reachable(0, 0.0), (Set{1}));
    EXPECT_EQ(definitional_reachable(two_point(), 0, 0.0), (Set{1}));
    EXPECT_EQ(o.omega(ExtendedLevel::pos(0.5)), (Set{1}));
    EXPECT_EQ(o.omega(ExtendedLevel::pos(1.0)), (Set{0, 1}));
    EXPECT_EQ(o.omega(ExtendedLevel::neg(5.0)), (Set{1}));
    EXPECT_EQ(definitional_omega(two_point(), ExtendedLevel::minus_zero()), (Set{1}));
    EXPECT_EQ(o.critical_values(), (std::vector<double>{0, 1}));
    EXPECT_EQ(o.sample_levels(), (std::vector<double>{0, 0.5, 1, 2}));
}

TEST(Definitional, PlusLinkIsRightLimit) {
    // a -> b only; c(a,b) = 1: a reaches a only through a budget of 1
    const DefinitionalOracle o(two_point());
    EXPECT_FALSE(o.link(0, 0, 0.5));
    EXPECT_TRUE(o.link(0, 0, 1.0));
    EXPECT_FALSE(o.plus_link(0, 0, 0.5));
    EXPECT_TRUE(o.plus_link(0, 0, 1.0));
}

TEST(Definitional, AgreesWithNaiveTable) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = random_instance(rng(), 6);
        const oracle::Table t{in.size, in.cost, in.map};
        const DefinitionalOracle o(in);
        const auto m = t.matrix(o.horizon());
        for (double eps : o.sample_levels())
            for (std::size_t x = 0; x < in.size; ++x)
                for (std::size_t y = 0; y < in.size; ++y)
                    ASSERT_EQ(o.link(x, y, eps), m[x * in.size + y] <= eps) << "trial " << trial;
    }
}

TEST(Verify, ThreeCyclePasses) {
    const auto r = verify_identities(make(3, {0, 1, 1, 1, 0, 1, 1, 1, 0}, {1, 2, 0}));
    EXPECT_TRUE(r.ok());
    for (const char* name : {"monotonicity", "orbit_recovery", "permutation_persistence", "reduction_equivalence"}) {
        ASSERT_NE(r.find(name), nullptr) << name;
        EXPECT_EQ(r.find(name)->status, CheckStatus::Pass) << name;
    }
}

TEST(Verify, TwoPointPasses) {
    const auto r = verify_identities(two_point());
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.find("positive_filtration")->status, CheckStatus::Pass);
    EXPECT_EQ(r.find("reduction_equivalence")->status, CheckStatus::Pass);
    EXPECT_EQ(r.find("permutation_persistence")->status, CheckStatus::Skipped);
}

TEST(Verify, DegenerateCostSkipsOrbitRecovery) {
    const auto r = verify_identities(make(3, {0, 0, 1, 0, 0, 1, 1, 1, 0}, {1, 2, 2}));
    EXPECT_TRUE(r.ok());
    ASSERT_NE(r.find("orbit_recovery"), nullptr);
    EXPECT_EQ(r.find("orbit_recovery")->status, CheckStatus::Skipped);
    EXPECT_FALSE(r.find("orbit_recovery")->detail.empty());
}

TEST(Verify, SeedFortyTwo) {
    const auto in = random_instance(42);
    EXPECT_EQ(in.seed, 42u);
    EXPECT_TRUE(verify_identities(in).ok());
}

TEST(Verify, RandomInstancesPass) {
    const auto run = run_verification(0, 400, 8, InjectedFault::None, 2);
    EXPECT_EQ(run.instances, 400u);
    for (const auto& f : run.failures)
        for (const auto& c : f.checks)
            if (c.status == CheckStatus::Fail) ADD_FAILURE() << "seed " << f.seed << ": " << c.name << " " << c.detail;
}

TEST(Verify, LargerInstancesPass) {
    const auto run = run_verification(5000, 40, 12);
    EXPECT_TRUE(run.failures.empty());
}

TEST(Verify, InjectedFaultsAreCaught) {
    for (auto fault : {InjectedFault::StrictLambda, InjectedFault::ClosedBeta}) {
        const auto run = run_verification(0, 200, 8, fault);
        ASSERT_FALSE(run.failures.empty());
        EXPECT_EQ(run.failures.front().find("reduction_equivalence")->status, CheckStatus::Fail);
        EXPECT_FALSE(run.failures.front().find("reduction_equivalence")->detail.empty());
    }
}

TEST(RandomInstance, DeterministicAndValid) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto a = random_instance(seed), b = random_instance(seed);
        EXPECT_EQ(a.cost, b.cost);
        EXPECT_EQ(a.map, b.map);
        EXPECT_GE(a.size, 2u);
        EXPECT_LE(a.size, 8u);
        EXPECT_NO_THROW(a.validate());
        for (std::size_t i = 0; i < a.size; ++i) EXPECT_EQ(a.c(i, i), 0.0);
    }
    EXPECT_THROW(random_instance(1, 1), SpecError);
    EXPECT_THROW(random_instance(1, 13), SpecError);
}

TEST(RandomInstance, CoversCostKinds) {
    std::map<CostKind, int> seen;
    int perms = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto in = random_instance(seed);
        ++seen[in.kind];
        perms += in.is_permutation();
    }
    EXPECT_GT(seen[CostKind::EuclideanMetric], 30);
    EXPECT_GT(seen[CostKind::SymmetricInteger], 30);
    EXPECT_GT(seen[CostKind::Asymmetric], 30);
    EXPECT_GT(perms, 30);
}

TEST(FiniteInstance, Validation) {
    EXPECT_THROW(make(0, {}, {}).validate(), SpecError);
    EXPECT_THROW(make(2, {0, 1, 1}, {0, 1}).validate(), SpecError);
    EXPECT_THROW(make(2, {0, 1, 1, 0}, {0, 2}).validate(), SpecError);
    EXPECT_THROW(DefinitionalOracle(make(13, std::vector<double>(169, 0), std::vector<std::uint32_t>(13, 0))),
                 SpecError);
}
