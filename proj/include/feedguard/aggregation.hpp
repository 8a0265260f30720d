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
#include <optional>
#include <random>
#include <vector>

#include "feedguard/error.hpp"
#include "feedguard/model.hpp"

namespace feedguard {

/// One report per user plus the number of (mirrored) oracles casting it.
struct VoteProfile {
    std::vector<ClassLabel> per_user_reports;
    std::vector<std::uint32_t> multiplicities;
};

struct AggregateResult {
    std::vector<std::uint64_t> vote_counts;
    std::vector<ClassLabel> winners;  // ascending
    std::vector<double> tie_mass;     // 1/|winners| on each winner
    std::optional<ClassLabel> sampled_output;

    bool is_winner(ClassLabel k) const { return tie_mass[k.index] > 0.0; }
};

namespace detail {

inline AggregateResult tally(const VoteProfile& profile, std::size_t num_classes) {
    if (profile.per_user_reports.empty()) throw InvalidArgument("majority vote over an empty profile");
    if (profile.per_user_reports.size() != profile.multiplicities.size())
        throw InvalidArgument("reports and multiplicities differ in length");
    AggregateResult out;
    out.vote_counts.assign(num_classes, 0);
    for (std::size_t n = 0; n < profile.per_user_reports.size(); ++n) {
        const auto k = profile.per_user_reports[n].index;
        if (k >= num_classes) throw InvalidArgument("report outside 1..K");
        if (profile.multiplicities[n] < 1) throw InvalidArgument("multiplicities must be at least 1");
        out.vote_counts[k] += profile.multiplicities[n];
    }
    const auto top = *std::max_element(out.vote_counts.begin(), out.vote_counts.end());
    for (std::size_t k = 0; k < num_classes; ++k)
        if (out.vote_counts[k] == top) out.winners.push_back(ClassLabel{k});
    out.tie_mass.assign(num_classes, 0.0);
    const double share = 1.0 / static_cast<double>(out.winners.size());
    for (auto w : out.winners) out.tie_mass[w.index] = share;
    return out;
}

}  // namespace detail

/// Majority vote with analytic tie mass; no tie is resolved.
inline AggregateResult majority_vote(const VoteProfile& profile, std::size_t num_classes) {
    return detail::tally(profile, num_classes);
}

/// Majority vote; ties are resolved uniformly at random with `rng`.
template <typename Rng>
AggregateResult majority_vote(const VoteProfile& profile, std::size_t num_classes, Rng& rng) {
    AggregateResult out = detail::tally(profile, num_classes);
    if (out.winners.size() == 1) {
        out.sampled_output = out.winners.front();
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, out.winners.size() - 1);
        out.sampled_output = out.winners[pick(rng)];
    }
    return out;
}

}  // namespace feedguard
