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

// Expected payoff of a user running c mirrored oracles, exact and sampled,
// and the best response over c with the other users on single oracles.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "feedguard/enumeration.hpp"
#include "feedguard/incentive.hpp"
#include "feedguard/model.hpp"
#include "feedguard/simulation.hpp"

namespace feedguard {

enum class Method { exact, monte_carlo };

inline const char* to_string(Method m) { return m == Method::exact ? "exact" : "monte_carlo"; }

inline Method parse_method(const std::string& s) {
    if (s == "exact") return Method::exact;
    if (s == "mc" || s == "monte_carlo" || s == "monte-carlo") return Method::monte_carlo;
    throw InvalidArgument("unknown method '" + s + "' (expected exact or mc)");
}

struct PayoffQuery {
    SystemConfig config;
    std::size_t focal_user = 1;
    Strategy focal_strategy;
    std::vector<Strategy> other_strategies;  // one per user, focal entry ignored; empty = single oracles
    double d = 1.0;

    /// Focal user on `oracle_count` concentrated oracles, everyone else single.
    static PayoffQuery concentrated(const SystemConfig& config, std::size_t user, std::uint32_t oracle_count, double d) {
        return PayoffQuery{config, user, Strategy::concentrated(config.user(user).total_stake, oracle_count), {}, d};
    }

    std::vector<Strategy> strategies() const {
        std::vector<Strategy> s = other_strategies.empty() ? config.single_oracle_strategies() : other_strategies;
        if (s.size() != config.num_users()) throw InvalidArgument("one strategy per user is required");
        s[focal_user - 1] = focal_strategy;
        return s;
    }

    void validate() const {
        if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
        focal_strategy.check_feasible(config.user(focal_user));
        const auto all = strategies();
        for (std::size_t n = 0; n < all.size(); ++n) all[n].check_feasible(config.users()[n]);
    }
};

struct PayoffEstimate {
    double value = 0.0;
    Method method = Method::exact;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// (total - count + 1, 1, ..., 1): the allocation maximising the expected
/// payoff among all integer allocations of `total_stake` over `oracle_count`.
inline Strategy optimal_allocation(std::uint32_t total_stake, std::uint32_t oracle_count) {
    return Strategy::concentrated(total_stake, oracle_count);
}

inline PayoffEstimate expected_payoff_exact(const PayoffQuery& query,
                                            std::uint64_t budget = kDefaultEnumerationBudget) {
    query.validate();
    const auto strategies = query.strategies();
    ProfileRequest request;
    request.focal_multiplicities = {static_cast<std::uint32_t>(query.focal_strategy.oracle_count())};
    request.with_error_rate = false;
    request.budget = budget;
    const auto profile = build_outcome_profile(query.config, query.focal_user, strategies, request);
    const double share = profile.payoff(0, allocation_factor(query.focal_strategy.allocation(), query.d), query.d);
    const double r = query.config.total_reward();
    return PayoffEstimate{std::clamp(share * r, 0.0, r), Method::exact, 0.0, 0};
}

inline PayoffEstimate expected_payoff_mc(const PayoffQuery& query, std::uint64_t samples = kDefaultMonteCarloSamples,
                                         std::uint64_t seed = kDefaultSeed) {
    if (samples < 1) throw InvalidArgument("Monte Carlo needs at least one sample");
    query.validate();
    const auto strategies = query.strategies();
    const MechanismParams params(query.d, query.config.total_reward());
    const std::size_t focal = query.focal_user - 1;
    auto stats = simulation::run_chunked(samples, seed, simulation::Stream::payoff, [&] {
        return [&, sampler = simulation::RoundSampler(query.config, strategies)](std::mt19937_64& rng) mutable {
            sampler.draw(rng);
            const auto outcome = settle_round(strategies, sampler.reports(), sampler.decided(), params);
            return outcome.per_user_payoffs[focal];
        };
    });
    const double r = query.config.total_reward();
    return PayoffEstimate{std::clamp(stats.mean(), 0.0, r), Method::monte_carlo, stats.std_error(), stats.count()};
}

struct EvaluationOptions {
    Method method = Method::exact;
    std::uint64_t samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t budget = kDefaultEnumerationBudget;
};

/// Expected payoff of `user` for every concentrated oracle count 1..stake,
/// others on single oracles. Entry c-1 holds the estimate for c oracles.
inline std::vector<PayoffEstimate> payoff_curve(const SystemConfig& config, std::size_t user, double d,
                                                const EvaluationOptions& options = {}) {
    if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
    const std::uint32_t stake = config.user(user).total_stake;
    std::vector<PayoffEstimate> out;
    if (options.method == Method::exact) {
        ProfileRequest request;
        request.focal_multiplicities.resize(stake);
        std::iota(request.focal_multiplicities.begin(), request.focal_multiplicities.end(), 1u);
        request.with_error_rate = false;
        request.budget = options.budget;
        const auto profile = build_outcome_profile(config, user, config.single_oracle_strategies(), request);
        const auto den = profile.denominators(d);
        const double r = config.total_reward();
        for (std::uint32_t c = 1; c <= stake; ++c) {
            const double f = allocation_factor(Strategy::concentrated(stake, c).allocation(), d);
            out.push_back(PayoffEstimate{std::clamp(profile.payoff(c - 1, f, den) * r, 0.0, r), Method::exact, 0.0, 0});
        }
    } else {
        for (std::uint32_t c = 1; c <= stake; ++c)
            out.push_back(expected_payoff_mc(PayoffQuery::concentrated(config, user, c, d), options.samples, options.seed));
    }
    return out;
}

/// argmax over c of the expected payoff; ties go to the smaller c.
inline std::uint32_t best_response_c(const SystemConfig& config, std::size_t user, double d,
                                     const EvaluationOptions& options = {}) {
    const auto curve = payoff_curve(config, user, d, options);
    std::uint32_t best = 1;
    for (std::uint32_t c = 2; c <= curve.size(); ++c)
        if (curve[c - 1].value > curve[best - 1].value) best = c;
    return best;
}

}  // namespace feedguard
