// Copyright 2026 The feedguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "feedguard/detail/parallel.hpp"
#include "feedguard/payoff.hpp"
#include "support/reference.hpp"

namespace feedguard {
namespace {

using testing::brute_force;

SystemConfig symmetric_three(std::vector<std::uint32_t> stakes) {
    return SystemConfig(ConfusionMatrix::symmetric(2, 0.8), std::move(stakes));
}

TEST(OptimalAllocation, Examples) {
    EXPECT_EQ(optimal_allocation(8, 3), Strategy({6, 1, 1}));
    EXPECT_EQ(optimal_allocation(5, 1), Strategy({5}));
    EXPECT_EQ(optimal_allocation(4, 4), Strategy({1, 1, 1, 1}));
    EXPECT_THROW(optimal_allocation(3, 4), InfeasibleStrategy);
}

TEST(ExpectedPayoffExact, SoleParticipantTakesEverything) {
    for (std::size_t k : {1u, 2u, 5u})
        for (double d : {1.0, 2.5}) {
            const SystemConfig config(ConfusionMatrix::symmetric(k, k == 1 ? 1.0 : 0.6), {4});
            EXPECT_DOUBLE_EQ(expected_payoff_exact(PayoffQuery::concentrated(config, 1, 3, d)).value, 1.0);
        }
}

TEST(ExpectedPayoffExact, PerfectOraclesSplitByFactor) {
    for (double d : {1.0, 1.7, 3.0}) {
        const SystemConfig config(ConfusionMatrix::identity(2), {3, 5});
        const double expected = std::pow(3.0, d) / (std::pow(3.0, d) + std::pow(5.0, d));
        EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(config, 1, 1, d)).value, expected, 1e-15);
    }
    const SystemConfig equal(ConfusionMatrix::identity(2), {1, 1});
    EXPECT_DOUBLE_EQ(expected_payoff_exact(PayoffQuery::concentrated(equal, 1, 1, 2.0)).value, 0.5);
}

// Frozen from tests/oracles/brute_force.py (exact outcome enumeration).
TEST(ExpectedPayoffExact, MatchesFrozenEnumerationValues) {
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(symmetric_three({1, 1, 1}), 1, 1, 1.0)).value,
                0.33333333333333337, 1e-14);
    const auto cfg = symmetric_three({2, 1, 1});
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(cfg, 1, 1, 1.0)).value, 0.47333333333333338, 1e-14);
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(cfg, 1, 2, 1.0)).value, 0.55333333333333334, 1e-14);
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(cfg, 1, 1, 2.0)).value, 0.60266666666666657, 1e-14);
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(cfg, 1, 2, 2.0)).value, 0.55333333333333334, 1e-14);
}

TEST(ExpectedPayoffExact, AgreesWithBruteForceOnArbitraryProfiles) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> exponent(1.0, 3.0);
    for (int trial = 0; trial < 60; ++trial) {
        const auto config = testing::random_small_config(rng, 4, 3, 5);
        std::vector<Strategy> strategies;
        for (const auto& u : config.users()) {
            std::uniform_int_distribution<std::uint32_t> count(1, u.total_stake);
            const auto c = count(rng);
            const auto comps = testing::compositions(u.total_stake, c);
            std::uniform_int_distribution<std::size_t> pick(0, comps.size() - 1);
            strategies.emplace_back(comps[pick(rng)]);
        }
        const double d = exponent(rng);
        const auto reference = brute_force(config, strategies, d);
        double total = 0.0;
        for (std::size_t n = 1; n <= config.num_users(); ++n) {
            PayoffQuery q{config, n, strategies[n - 1], strategies, d};
            const auto est = expected_payoff_exact(q);
            EXPECT_NEAR(est.value, reference.payoff[n - 1], 1e-12) << "trial " << trial << " user " << n;
            EXPECT_EQ(est.method, Method::exact);
            EXPECT_EQ(est.std_error, 0.0);
            EXPECT_GE(est.value, 0.0);
            EXPECT_LE(est.value, 1.0);
            total += est.value;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);  // the full reward is always paid out
    }
}

TEST(ExpectedPayoffExact, ScalesWithTotalReward) {
    const SystemConfig config(ConfusionMatrix::symmetric(3, 0.7), {3, 2, 2}, 7.5);
    const SystemConfig unit(ConfusionMatrix::symmetric(3, 0.7), {3, 2, 2});
    EXPECT_NEAR(expected_payoff_exact(PayoffQuery::concentrated(config, 1, 2, 1.5)).value,
                7.5 * expected_payoff_exact(PayoffQuery::concentrated(unit, 1, 2, 1.5)).value, 1e-13);
}

TEST(ExpectedPayoffExact, SplittingNeverHurtsAtLinearExponent) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 40; ++trial) {
        const auto config = testing::random_small_config(rng, 4, 3, 6);
        for (const auto& u : config.users()) {
            const auto curve = payoff_curve(config, u.id, 1.0);
            for (std::size_t c = 1; c < curve.size(); ++c)
                EXPECT_GE(curve[c].value, curve[c - 1].value - 1e-12) << "trial " << trial << " user " << u.id;
        }
    }
}

TEST(ExpectedPayoffExact, RejectsInfeasibleAndOversizedQueries) {
    const auto config = testing::reference_system();
    EXPECT_THROW(PayoffQuery::concentrated(config, 1, 9, 1.0), InfeasibleStrategy);
    PayoffQuery q = PayoffQuery::concentrated(config, 1, 2, 1.0);
    q.focal_strategy = Strategy({8, 1});
    EXPECT_THROW(expected_payoff_exact(q), InfeasibleStrategy);
    q = PayoffQuery::concentrated(config, 1, 2, 0.5);
    EXPECT_THROW(expected_payoff_exact(q), InvalidArgument);
    q = PayoffQuery::concentrated(config, 1, 2, 1.0);
    EXPECT_THROW(expected_payoff_exact(q, /*budget=*/1000), BudgetExceeded);
    EXPECT_EQ(enumeration_terms(5, 10), 48'828'125u);
}

TEST(ExpectedPayoffMc, SoleParticipantHasNoVariance) {
    const SystemConfig config(ConfusionMatrix::symmetric(3, 0.5), {3});
    const auto est = expected_payoff_mc(PayoffQuery::concentrated(config, 1, 2, 1.3), 5000, 9);
    EXPECT_EQ(est.value, 1.0);
    EXPECT_EQ(est.std_error, 0.0);
    EXPECT_EQ(est.samples, 5000u);
    EXPECT_EQ(est.method, Method::monte_carlo);
    EXPECT_THROW(expected_payoff_mc(PayoffQuery::concentrated(config, 1, 2, 1.3), 0, 9), InvalidArgument);
}

TEST(ExpectedPayoffMc, AgreesWithExactOnSmallInstances) {
    std::mt19937_64 rng(23);
    int within = 0;
    const int trials = 30;
    for (int trial = 0; trial < trials; ++trial) {
        const auto config = testing::random_small_config(rng, 4, 3, 5, 2);
        std::uniform_int_distribution<std::uint32_t> count(1, config.user(1).total_stake);
        const auto q = PayoffQuery::concentrated(config, 1, count(rng), 1.0 + 0.1 * trial);
        const auto exact = expected_payoff_exact(q);
        const auto mc = expected_payoff_mc(q, 100'000, 1000 + trial);
        if (std::abs(mc.value - exact.value) <= 3 * mc.std_error) ++within;
    }
    EXPECT_GE(within, 28);  // 3 sigma covers ~99.7%
}

TEST(ExpectedPayoffMc, ReproducibleAcrossThreadCounts) {
    std::mt19937_64 rng(24);
    const auto config = testing::random_small_config(rng, 4, 3, 5, 3);
    const auto q = PayoffQuery::concentrated(config, 1, 1, 1.5);
    parallel::set_thread_count(1);
    const auto a = expected_payoff_mc(q, 100'000, 77);
    parallel::set_thread_count(4);
    const auto b = expected_payoff_mc(q, 100'000, 77);
    parallel::set_thread_count(0);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    const auto c = expected_payoff_mc(q, 100'000, 78);
    EXPECT_NE(a.value, c.value);
}

TEST(ExactEnumeration, ReproducibleAcrossThreadCounts) {
    const auto config = testing::reference_system();
    parallel::set_thread_count(1);
    const auto a = payoff_curve(config, 10, 1.3);
    parallel::set_thread_count(3);
    const auto b = payoff_curve(config, 10, 1.3);
    parallel::set_thread_count(0);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
}

TEST(BestResponse, ReferenceSystemAtLinearExponentUsesEveryOracle) {
    const auto config = testing::reference_system();
    EXPECT_EQ(best_response_c(config, 1, 1.0), 8u);
}

TEST(BestResponse, SingleUnitStake) {
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.7), {1, 3, 2});
    for (double d : {1.0, 2.0, 9.0}) EXPECT_EQ(best_response_c(config, 1, d), 1u);
}

TEST(BestResponse, TiesGoToFewerOracles) {
    // Perfect oracles always win; at d = 1 the factor is the total stake for any c.
    const SystemConfig config(ConfusionMatrix::identity(2), {4, 2});
    EXPECT_EQ(best_response_c(config, 1, 1.0), 1u);
}

TEST(BestResponse, MonteCarloPath) {
    const auto config = symmetric_three({2, 1, 1});
    EvaluationOptions mc{Method::monte_carlo, 200'000, 5};
    EXPECT_EQ(best_response_c(config, 1, 1.0, mc), 2u);
    EXPECT_EQ(best_response_c(config, 1, 2.0, mc), 1u);
}

}  // namespace
}  // namespace feedguard
