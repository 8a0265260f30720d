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

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feedguard/enumeration.hpp"
#include "feedguard/payoff.hpp"
#include "feedguard/simulation.hpp"

namespace feedguard {

/// Pr(output != truth) with ties split analytically. Independent of d.
inline double error_rate_exact(const SystemConfig& config, std::span<const Strategy> strategies,
                               std::uint64_t budget = kDefaultEnumerationBudget) {
    if (strategies.size() != config.num_users()) throw InvalidArgument("one strategy per user is required");
    strategies[0].check_feasible(config.users()[0]);
    ProfileRequest request;
    request.focal_multiplicities = {static_cast<std::uint32_t>(strategies[0].oracle_count())};
    request.budget = budget;
    const auto profile = build_outcome_profile(config, 1, strategies, request);
    return std::clamp(profile.error_rate(0), 0.0, 1.0);
}

inline std::pair<double, double> error_rate_mc(const SystemConfig& config, std::span<const Strategy> strategies,
                                               std::uint64_t samples = kDefaultMonteCarloSamples,
                                               std::uint64_t seed = kDefaultSeed) {
    if (samples < 1) throw InvalidArgument("Monte Carlo needs at least one sample");
    if (strategies.size() != config.num_users()) throw InvalidArgument("one strategy per user is required");
    for (std::size_t n = 0; n < strategies.size(); ++n) strategies[n].check_feasible(config.users()[n]);
    auto stats = simulation::run_chunked(samples, seed, simulation::Stream::error_rate, [&] {
        return [sampler = simulation::RoundSampler(config, strategies)](std::mt19937_64& rng) mutable {
            sampler.draw(rng);
            return sampler.decided() == sampler.truth() ? 0.0 : 1.0;
        };
    });
    return {stats.mean(), stats.std_error()};
}

/// Focal user on each oracle count in c_values, everyone else on one oracle,
/// evaluated at each exponent in d_values.
struct ExperimentSpec {
    SystemConfig config;
    std::size_t focal_user = 1;
    std::vector<std::uint32_t> c_values;
    std::vector<double> d_values;
    Method method = Method::exact;
    std::uint64_t samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        const auto stake = config.user(focal_user).total_stake;
        if (c_values.empty() || d_values.empty()) throw InvalidArgument("experiment needs c and d values");
        for (auto c : c_values)
            if (c < 1 || c > stake)
                throw InfeasibleStrategy("c = " + std::to_string(c) + " is outside 1.." + std::to_string(stake));
        for (double d : d_values)
            if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
        if (samples < 1) throw InvalidArgument("Monte Carlo needs at least one sample");
    }
};

struct SweepRow {
    std::uint32_t c = 1;
    double d = 1.0;
    double expected_payoff = 0.0;
    double error_rate = 0.0;
    double std_error_payoff = 0.0;
    double std_error_error_rate = 0.0;
};

/// Rows ordered by (d, c) in the order given by the spec.
inline std::vector<SweepRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto& config = spec.config;
    const auto stake = config.user(spec.focal_user).total_stake;
    std::vector<SweepRow> rows;
    rows.reserve(spec.c_values.size() * spec.d_values.size());

    if (spec.method == Method::exact) {
        ProfileRequest request;
        request.focal_multiplicities = spec.c_values;
        std::sort(request.focal_multiplicities.begin(), request.focal_multiplicities.end());
        request.focal_multiplicities.erase(
            std::unique(request.focal_multiplicities.begin(), request.focal_multiplicities.end()),
            request.focal_multiplicities.end());
        const auto profile =
            build_outcome_profile(config, spec.focal_user, config.single_oracle_strategies(), request);
        const double r = config.total_reward();
        for (double d : spec.d_values) {
            const auto den = profile.denominators(d);
            for (auto c : spec.c_values) {
                const auto slot = profile.slot_of(c);
                const double f = allocation_factor(Strategy::concentrated(stake, c).allocation(), d);
                rows.push_back(SweepRow{c, d, std::clamp(profile.payoff(slot, f, den) * r, 0.0, r),
                                        std::clamp(profile.error_rate(slot), 0.0, 1.0), 0.0, 0.0});
            }
        }
        return rows;
    }

    // Common random numbers: every (c, d) point reuses the same seed, and the
    // error rate is sampled once per c.
    std::vector<std::pair<double, double>> error(spec.c_values.size());
    for (std::size_t i = 0; i < spec.c_values.size(); ++i) {
        auto strategies = config.single_oracle_strategies();
        strategies[spec.focal_user - 1] = Strategy::concentrated(stake, spec.c_values[i]);
        error[i] = error_rate_mc(config, strategies, spec.samples, spec.seed);
    }
    for (double d : spec.d_values) {
        for (std::size_t i = 0; i < spec.c_values.size(); ++i) {
            const auto est = expected_payoff_mc(PayoffQuery::concentrated(config, spec.focal_user, spec.c_values[i], d),
                                                spec.samples, spec.seed);
            rows.push_back(SweepRow{spec.c_values[i], d, est.value, error[i].first, est.std_error, error[i].second});
        }
    }
    return rows;
}

inline constexpr const char* kSweepCsvHeader = "c,d,expected_payoff,payoff_stderr,error_rate,error_stderr";

namespace detail {
inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
}  // namespace detail

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.c << ',' << detail::format_g12(r.d) << ',' << detail::format_g12(r.expected_payoff) << ','
            << detail::format_g12(r.std_error_payoff) << ',' << detail::format_g12(r.error_rate) << ','
            << detail::format_g12(r.std_error_error_rate) << '\n';
    }
}

}  // namespace feedguard
