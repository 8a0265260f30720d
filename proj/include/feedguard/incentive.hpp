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

#pragma once

// Reward factors and proportional reward sharing.
//
// An oracle that reported the decided class earns factor stake^d, every
// other oracle earns 0. The task reward R is split in proportion to the
// factors. d = 1 is the stake-proportional rule; d > 1 is superlinear.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "feedguard/error.hpp"
#include "feedguard/model.hpp"

namespace feedguard {

struct MechanismParams {
    double exponent = 1.0;
    double total_reward = 1.0;

    MechanismParams() = default;
    MechanismParams(double d, double reward = 1.0) : exponent(d), total_reward(reward) {
        if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
        if (!(reward > 0.0)) throw InvalidArgument("total reward must be positive");
    }
};

struct RewardOutcome {
    std::vector<double> factors;  // per oracle, users in order
    std::vector<double> payoffs;  // per oracle
    std::vector<double> per_user_payoffs;
};

/// stake^d, with 1^d == 1 exactly.
inline double power_factor(std::uint64_t stake, double d) {
    if (stake == 1) return 1.0;
    return std::exp(d * std::log(static_cast<double>(stake)));
}

inline double reward_factor(std::int64_t stake, ClassLabel reported, ClassLabel decided, double d) {
    if (stake < 1) throw InvalidArgument("stake must be at least s_min = 1");
    if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
    return reported == decided ? power_factor(static_cast<std::uint64_t>(stake), d) : 0.0;
}

/// Sum of stake^d over the oracles of one allocation.
inline double allocation_factor(std::span<const std::uint32_t> allocation, double d) {
    double f = 0.0;
    for (auto s : allocation) f += power_factor(s, d);
    return f;
}

/// payoff_i = factor_i / sum(factors) * R.
inline std::vector<double> distribute_rewards(std::span<const double> factors, double total_reward) {
    if (!(total_reward > 0.0)) throw InvalidArgument("total reward must be positive");
    double sum = 0.0;
    for (double f : factors) {
        if (!(f >= 0.0)) throw InvalidArgument("reward factors must be nonnegative");
        sum += f;
    }
    if (!(sum > 0.0)) throw ZeroRewardFactors("no oracle earned a positive reward factor");
    std::vector<double> payoffs(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) payoffs[i] = factors[i] / sum * total_reward;
    return payoffs;
}

/// Settles one round: every oracle of user n reports reports[n].
inline RewardOutcome settle_round(std::span<const Strategy> strategies, std::span<const ClassLabel> reports,
                                  ClassLabel decided, const MechanismParams& params) {
    if (strategies.size() != reports.size()) throw InvalidArgument("one report per user is required");
    RewardOutcome out;
    for (std::size_t n = 0; n < strategies.size(); ++n)
        for (auto s : strategies[n].allocation())
            out.factors.push_back(reward_factor(s, reports[n], decided, params.exponent));
    out.payoffs = distribute_rewards(out.factors, params.total_reward);
    out.per_user_payoffs.assign(strategies.size(), 0.0);
    std::size_t i = 0;
    for (std::size_t n = 0; n < strategies.size(); ++n)
        for (std::size_t j = 0; j < strategies[n].oracle_count(); ++j) out.per_user_payoffs[n] += out.payoffs[i++];
    return out;
}

}  // namespace feedguard
