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

#include <random>
#include <sstream>

#include "feedguard/metrics.hpp"
#include "support/reference.hpp"

namespace feedguard {
namespace {

std::vector<Strategy> focal_on(const SystemConfig& config, std::uint32_t c) {
    auto s = config.single_oracle_strategies();
    s[0] = Strategy::concentrated(config.users()[0].total_stake, c);
    return s;
}

TEST(ErrorRate, PerfectOraclesNeverErr) {
    const SystemConfig config(ConfusionMatrix::identity(4), {3, 2, 1});
    for (std::uint32_t c = 1; c <= 3; ++c) {
        EXPECT_EQ(error_rate_exact(config, focal_on(config, c)), 0.0);
        const auto [mc, se] = error_rate_mc(config, focal_on(config, c), 5000, 3);
        EXPECT_EQ(mc, 0.0);
        EXPECT_EQ(se, 0.0);
    }
}

TEST(ErrorRate, SingleVoterErrsAtItsMistakeRate) {
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.8), {1});
    EXPECT_NEAR(error_rate_exact(config, config.single_oracle_strategies()), 0.2, 1e-15);
    const SystemConfig three(ConfusionMatrix::symmetric(3, 0.7), {1});
    EXPECT_NEAR(error_rate_exact(three, three.single_oracle_strategies()), 0.3, 1e-15);
}

// Frozen from tests/oracles/brute_force.py.
TEST(ErrorRate, MatchesFrozenEnumerationValues) {
    const SystemConfig unit(ConfusionMatrix::symmetric(2, 0.8), {1, 1, 1});
    EXPECT_NEAR(error_rate_exact(unit, unit.single_oracle_strategies()), 0.10399999999999995, 1e-14);
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.8), {2, 1, 1});
    EXPECT_NEAR(error_rate_exact(config, focal_on(config, 1)), 0.104, 1e-14);
    EXPECT_NEAR(error_rate_exact(config, focal_on(config, 2)), 0.152, 1e-14);
}

TEST(ErrorRate, AgreesWithBruteForce) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const auto config = testing::random_small_config(rng, 4, 3, 4);
        std::uniform_int_distribution<std::uint32_t> pick(1, config.users()[0].total_stake);
        const auto strategies = focal_on(config, pick(rng));
        const auto ref = testing::brute_force(config, strategies, 1.0);
        EXPECT_NEAR(error_rate_exact(config, strategies), ref.error_rate, 1e-12) << "trial " << trial;
    }
}

TEST(ErrorRate, ReferenceSystemGrowsWithMirroring) {
    const auto config = testing::reference_system();
    double previous = -1.0;
    for (std::uint32_t c = 1; c <= 8; ++c) {
        const double e = error_rate_exact(config, focal_on(config, c));
        EXPECT_GT(e, previous) << "c = " << c;
        previous = e;
    }
}

TEST(ErrorRate, MonteCarloAgreesWithExact) {
    const SystemConfig config(ConfusionMatrix::symmetric(3, 0.6), {3, 2, 1, 1});
    for (std::uint32_t c = 1; c <= 3; ++c) {
        const auto s = focal_on(config, c);
        const auto [mc, se] = error_rate_mc(config, s, 200'000, 11);
        EXPECT_NEAR(mc, error_rate_exact(config, s), 4.0 * se);
    }
}

TEST(RunExperiment, ExactRowsAreOrderedAndErrorIsIndependentOfD) {
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.8), {2, 1, 1});
    ExperimentSpec spec{config, 1, {1, 2}, {1.0, 2.0}, Method::exact, 1000, 5};
    const auto rows = run_experiment(spec);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].c, 1u);
    EXPECT_EQ(rows[0].d, 1.0);
    EXPECT_EQ(rows[1].c, 2u);
    EXPECT_EQ(rows[2].d, 2.0);
    EXPECT_NEAR(rows[0].expected_payoff, 0.47333333333333338, 1e-14);
    EXPECT_NEAR(rows[1].expected_payoff, 0.55333333333333334, 1e-14);
    EXPECT_NEAR(rows[2].expected_payoff, 0.60266666666666657, 1e-14);
    EXPECT_NEAR(rows[3].expected_payoff, 0.55333333333333334, 1e-14);
    EXPECT_EQ(rows[0].error_rate, rows[2].error_rate);
    EXPECT_EQ(rows[1].error_rate, rows[3].error_rate);
    EXPECT_NEAR(rows[1].error_rate, 0.152, 1e-14);
    for (const auto& r : rows) EXPECT_EQ(r.std_error_payoff, 0.0);
}

TEST(RunExperiment, MonteCarloRowsTrackExactRows) {
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.8), {2, 1, 1});
    ExperimentSpec spec{config, 1, {1, 2}, {1.0, 2.0}, Method::monte_carlo, 100'000, 5};
    const auto mc = run_experiment(spec);
    spec.method = Method::exact;
    const auto exact = run_experiment(spec);
    ASSERT_EQ(mc.size(), exact.size());
    for (std::size_t i = 0; i < mc.size(); ++i) {
        EXPECT_GT(mc[i].std_error_payoff, 0.0);
        EXPECT_NEAR(mc[i].expected_payoff, exact[i].expected_payoff, 4.0 * mc[i].std_error_payoff);
        EXPECT_NEAR(mc[i].error_rate, exact[i].error_rate, 4.0 * mc[i].std_error_error_rate);
    }
    // Same seed, same rows.
    spec.method = Method::monte_carlo;
    const auto again = run_experiment(spec);
    for (std::size_t i = 0; i < mc.size(); ++i) EXPECT_EQ(mc[i].expected_payoff, again[i].expected_payoff);
}

TEST(RunExperiment, RejectsInfeasibleRequests) {
    const SystemConfig config(ConfusionMatrix::symmetric(2, 0.8), {2, 1});
    EXPECT_THROW(run_experiment(ExperimentSpec{config, 1, {3}, {1.0}}), InfeasibleStrategy);
    EXPECT_THROW(run_experiment(ExperimentSpec{config, 1, {1}, {0.5}}), InvalidArgument);
    EXPECT_THROW(run_experiment(ExperimentSpec{config, 1, {}, {1.0}}), InvalidArgument);
    EXPECT_THROW(run_experiment(ExperimentSpec{config, 3, {1}, {1.0}}), InvalidArgument);
}

TEST(WriteSweepCsv, Format) {
    const std::vector<SweepRow> rows{{1, 1.0, 0.5, 0.25, 0.0, 0.0}, {2, 1.25, 1.0 / 3.0, 0.1, 0.001, 0.002}};
    std::ostringstream out;
    write_sweep_csv(out, rows);
    EXPECT_EQ(out.str(),
              "c,d,expected_payoff,payoff_stderr,error_rate,error_stderr\n"
              "1,1,0.5,0,0.25,0\n"
              "2,1.25,0.333333333333,0.001,0.1,0.002\n");
}

}  // namespace
}  // namespace feedguard
