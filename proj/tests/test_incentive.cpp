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
#include <numeric>
#include <random>

#include "feedguard/incentive.hpp"

namespace feedguard {
namespace {

constexpr ClassLabel kA{0};
constexpr ClassLabel kB{1};

TEST(RewardFactor, Examples) {
    EXPECT_DOUBLE_EQ(reward_factor(4, kA, kA, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(reward_factor(4, kA, kA, 2.0), 16.0);
    EXPECT_EQ(reward_factor(9, kA, kB, 1.0), 0.0);
    EXPECT_EQ(reward_factor(9, kA, kB, 3.7), 0.0);
    EXPECT_EQ(reward_factor(1, kA, kA, 2.31), 1.0);
    EXPECT_EQ(reward_factor(1, kA, kA, 16.0), 1.0);
}

TEST(RewardFactor, Errors) {
    EXPECT_THROW(reward_factor(0, kA, kA, 1.0), InvalidArgument);
    EXPECT_THROW(reward_factor(3, kA, kA, 0.99), InvalidArgument);
    EXPECT_THROW(MechanismParams(0.5), InvalidArgument);
}

TEST(DistributeRewards, Examples) {
    EXPECT_EQ(distribute_rewards(std::vector<double>{3, 1}, 1.0), (std::vector<double>{0.75, 0.25}));
    EXPECT_EQ(distribute_rewards(std::vector<double>{5, 0, 0}, 1.0), (std::vector<double>{1, 0, 0}));
    const double f = reward_factor(2, kA, kA, 3.0);
    const auto p = distribute_rewards(std::vector<double>{f, 1, 1}, 1.0);
    EXPECT_NEAR(p[0], 0.8, 1e-15);
    EXPECT_NEAR(p[1], 0.1, 1e-15);
    EXPECT_NEAR(p[2], 0.1, 1e-15);
}

TEST(DistributeRewards, AllZeroFactorsIsADistinctError) {
    EXPECT_THROW(distribute_rewards(std::vector<double>{0, 0}, 1.0), ZeroRewardFactors);
    EXPECT_THROW(distribute_rewards(std::vector<double>{}, 1.0), ZeroRewardFactors);
    EXPECT_THROW(distribute_rewards(std::vector<double>{1}, 0.0), InvalidArgument);
}

TEST(DistributeRewards, BudgetBalance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> factor(0.0, 50.0), reward(0.1, 10.0);
    std::uniform_int_distribution<int> len(1, 20);
    for (int trial = 0; trial < 10'000; ++trial) {
        std::vector<double> f(len(rng));
        for (auto& v : f) v = factor(rng);
        f[0] += 1e-3;
        const double r = reward(rng);
        const auto p = distribute_rewards(f, r);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), r, 1e-12 * r);
    }
}

TEST(RewardFactor, SuperadditiveExactlyWhenSuperlinear) {
    for (std::uint32_t a = 1; a <= 12; ++a)
        for (std::uint32_t b = 1; b <= 12; ++b) {
            EXPECT_DOUBLE_EQ(power_factor(a + b, 1.0), power_factor(a, 1.0) + power_factor(b, 1.0));
            for (double d : {1.01, 1.5, 2.0, 3.3})
                EXPECT_GT(power_factor(a + b, d), power_factor(a, d) + power_factor(b, d));
        }
}

TEST(RewardFactor, MonotoneInStakeAndExponent) {
    for (double d : {1.0, 1.25, 2.0, 5.0})
        for (std::uint32_t s = 1; s < 30; ++s) EXPECT_LT(power_factor(s, d), power_factor(s + 1, d));
    for (std::uint32_t s = 2; s < 30; ++s)
        for (double d = 1.0; d < 6.0; d += 0.25) EXPECT_LT(power_factor(s, d), power_factor(s, d + 0.25));
}

TEST(SettleRound, ScaleEquivarianceAtLinearExponent) {
    const std::vector<Strategy> s{Strategy({3, 1}), Strategy({2}), Strategy({5})};
    const std::vector<Strategy> doubled{Strategy({6, 2}), Strategy({4}), Strategy({10})};
    const std::vector<ClassLabel> reports{kA, kA, kB};
    const auto a = settle_round(s, reports, kA, MechanismParams(1.0));
    const auto b = settle_round(doubled, reports, kA, MechanismParams(1.0));
    for (std::size_t i = 0; i < a.payoffs.size(); ++i) EXPECT_NEAR(a.payoffs[i], b.payoffs[i], 1e-15);
    EXPECT_DOUBLE_EQ(a.per_user_payoffs[0], 4.0 / 6.0);
    EXPECT_EQ(a.per_user_payoffs[2], 0.0);
    for (std::size_t i = 0; i < a.factors.size(); ++i) EXPECT_EQ(a.factors[i] == 0.0, i == 3);
}

}  // namespace
}  // namespace feedguard
