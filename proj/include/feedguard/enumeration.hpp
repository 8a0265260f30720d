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

// Exact outcome enumeration for one focal user.
//
// The focal user's expected payoff is a sum over (truth, reports of the other
// users, focal report) of
//
//     Pr(outcome) * tie_mass(focal report) * F / (F + D)
//
// where F is the focal reward factor and D the summed factors of the other
// users who agree with the focal report. Vote counts and probabilities do not
// depend on d, and D depends on the agreeing set only through how many users
// of each distinct allocation agree. One enumeration pass therefore reduces
// the sum to a table of weights indexed by that histogram ("key"), which can
// then be evaluated at any d and any focal allocation with the same oracle
// count. The error rate Pr(output != truth) falls out of the same pass.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "feedguard/detail/parallel.hpp"
#include "feedguard/error.hpp"
#include "feedguard/incentive.hpp"
#include "feedguard/model.hpp"

namespace feedguard {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000'000ULL;

/// Largest weight table (slots x keys) a profile may allocate.
inline constexpr std::uint64_t kMaxProfileCells = 1ULL << 26;

/// K * K^(N-1) * K terms: truth, the other users' reports, the focal report.
inline std::uint64_t enumeration_terms(std::size_t num_classes, std::size_t num_users) {
    std::uint64_t terms = 1;
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / (num_classes + 1);
    for (std::size_t i = 0; i < num_users + 1; ++i) {
        if (terms > cap) return std::numeric_limits<std::uint64_t>::max();
        terms *= num_classes;
    }
    return terms;
}

struct ProfileRequest {
    std::vector<std::uint32_t> focal_multiplicities{1};
    bool with_error_rate = true;
    std::uint64_t budget = kDefaultEnumerationBudget;
};

class OutcomeProfile {
  public:
    std::span<const std::uint32_t> multiplicities() const { return multiplicities_; }
    std::size_t key_count() const { return keys_; }

    std::size_t slot_of(std::uint32_t multiplicity) const {
        for (std::size_t s = 0; s < multiplicities_.size(); ++s)
            if (multiplicities_[s] == multiplicity) return s;
        throw InvalidArgument("profile was not built for " + std::to_string(multiplicity) + " focal oracles");
    }

    /// Summed reward factor of the agreeing other users, per key.
    std::vector<double> denominators(double d) const {
        std::vector<double> group_factor(group_allocations_.size());
        for (std::size_t g = 0; g < group_allocations_.size(); ++g)
            group_factor[g] = allocation_factor(group_allocations_[g], d);
        std::vector<double> out(keys_, 0.0);
        const std::size_t groups = group_allocations_.size();
        for (std::size_t key = 0; key < keys_; ++key) {
            double sum = 0.0;
            for (std::size_t g = 0; g < groups; ++g) sum += key_digits_[key * groups + g] * group_factor[g];
            out[key] = sum;
        }
        return out;
    }

    /// Expected share of the reward (R = 1) for a focal factor F.
    double payoff(std::size_t slot, double focal_factor, std::span<const double> denominators) const {
        const double* w = weights_.data() + slot * keys_;
        double sum = 0.0;
        for (std::size_t key = 0; key < keys_; ++key) {
            if (w[key] == 0.0) continue;
            sum += w[key] * (focal_factor / (focal_factor + denominators[key]));
        }
        return sum;
    }

    double payoff(std::size_t slot, double focal_factor, double d) const {
        return payoff(slot, focal_factor, denominators(d));
    }

    /// Probability that the focal report wins (fractionally on ties).
    double win_probability(std::size_t slot) const {
        double sum = 0.0;
        for (std::size_t key = 0; key < keys_; ++key) sum += weights_[slot * keys_ + key];
        return sum;
    }

    double error_rate(std::size_t slot) const {
        if (!has_error_) throw InvalidArgument("profile was built without error rates");
        return error_[slot];
    }

  private:
    friend OutcomeProfile build_outcome_profile(const SystemConfig&, std::size_t, std::span<const Strategy>,
                                                const ProfileRequest&);

    std::vector<std::uint32_t> multiplicities_;
    std::vector<std::vector<std::uint32_t>> group_allocations_;
    std::size_t keys_ = 1;
    std::vector<std::uint32_t> key_digits_;  // keys_ x groups
    std::vector<double> weights_;            // slots x keys_
    std::vector<double> error_;
    bool has_error_ = false;
};

namespace detail {

struct ChunkTotals {
    std::vector<double> weights;
    std::vector<double> error;
};

struct EnumerationPlan {
    std::size_t num_classes = 0;
    std::size_t others = 0;
    std::vector<double> prior;
    std::vector<double> confusion;  // row-major
    std::vector<std::uint64_t> vote_weight;  // oracle count of each other user
    std::vector<std::size_t> key_weight;     // radix weight of each other user's group
    std::vector<std::uint32_t> focal_multiplicities;
    std::size_t keys = 1;
    std::size_t fixed_digits = 0;
    bool with_error = true;
};

inline void enumerate_chunk(const EnumerationPlan& plan, std::size_t chunk, ChunkTotals& out) {
    const std::size_t K = plan.num_classes;
    const std::size_t O = plan.others;
    const std::size_t slots = plan.focal_multiplicities.size();
    out.weights.assign(slots * plan.keys, 0.0);
    out.error.assign(slots, 0.0);

    std::vector<std::size_t> digit(O, 0);
    for (std::size_t q = plan.fixed_digits; q-- > 0;) {
        digit[q] = chunk % K;
        chunk /= K;
    }
    std::vector<std::uint64_t> counts(K, 0);
    std::vector<std::size_t> keys(K, 0);
    for (std::size_t q = 0; q < O; ++q) {
        counts[digit[q]] += plan.vote_weight[q];
        keys[digit[q]] += plan.key_weight[q];
    }
    // prefix[q * K + t] = prior(t) * prod_{i<q} P(t, digit_i)
    std::vector<double> prefix((O + 1) * K);
    for (std::size_t t = 0; t < K; ++t) prefix[t] = plan.prior[t];
    auto refresh_from = [&](std::size_t from) {
        for (std::size_t q = from; q < O; ++q)
            for (std::size_t t = 0; t < K; ++t)
                prefix[(q + 1) * K + t] = prefix[q * K + t] * plan.confusion[t * K + digit[q]];
    };
    refresh_from(0);

    std::vector<double> joint(K * K);  // joint[y * K + t] = Pr(truth t, others, focal y)
    std::vector<double> mass(K);
    const double* P = plan.confusion.data();

    for (;;) {
        const double* q_t = prefix.data() + O * K;
        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) total += q_t[t];
        if (total > 0.0) {
            for (std::size_t y = 0; y < K; ++y) {
                double a = 0.0;
                for (std::size_t t = 0; t < K; ++t) {
                    const double v = q_t[t] * P[t * K + y];
                    joint[y * K + t] = v;
                    a += v;
                }
                mass[y] = a;
            }
            for (std::size_t y = 0; y < K; ++y) {
                const double a = mass[y];
                if (a == 0.0) continue;
                std::uint64_t max_other = 0;
                for (std::size_t l = 0; l < K; ++l)
                    if (l != y) max_other = std::max(max_other, counts[l]);
                const double* jy = joint.data() + y * K;
                for (std::size_t s = 0; s < slots; ++s) {
                    const std::uint64_t cy = counts[y] + plan.focal_multiplicities[s];
                    if (cy > max_other) {
                        out.weights[s * plan.keys + keys[y]] += a;
                        if (plan.with_error) {
                            double wrong = 0.0;
                            for (std::size_t t = 0; t < K; ++t)
                                if (t != y) wrong += jy[t];
                            out.error[s] += wrong;
                        }
                        continue;
                    }
                    const std::uint64_t top = max_other;  // cy <= max_other
                    std::size_t winners = cy == top ? 1 : 0;
                    for (std::size_t l = 0; l < K; ++l)
                        if (l != y && counts[l] == top) ++winners;
                    const double share = 1.0 / static_cast<double>(winners);
                    if (cy == top) out.weights[s * plan.keys + keys[y]] += a * share;
                    if (plan.with_error) {
                        double wrong = 0.0;
                        for (std::size_t t = 0; t < K; ++t) {
                            const bool wins = t == y ? cy == top : counts[t] == top;
                            wrong += wins ? jy[t] * (1.0 - share) : jy[t];
                        }
                        out.error[s] += wrong;
                    }
                }
            }
        }

        // odometer over the free digits, last digit fastest
        std::size_t pos = O;
        bool advanced = false;
        while (pos > plan.fixed_digits) {
            --pos;
            const std::size_t old = digit[pos];
            counts[old] -= plan.vote_weight[pos];
            keys[old] -= plan.key_weight[pos];
            const std::size_t next = old + 1 < K ? old + 1 : 0;
            digit[pos] = next;
            counts[next] += plan.vote_weight[pos];
            keys[next] += plan.key_weight[pos];
            if (next != 0) {
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
        refresh_from(pos);
    }
}

}  // namespace detail

/// Enumerates every outcome for `focal_id` (1-based). `strategies` holds one
/// entry per user; the focal entry is ignored and replaced by each requested
/// oracle count. Throws BudgetExceeded when the enumeration is too large.
inline OutcomeProfile build_outcome_profile(const SystemConfig& config, std::size_t focal_id,
                                            std::span<const Strategy> strategies, const ProfileRequest& request) {
    const std::size_t K = config.num_classes();
    const std::size_t N = config.num_users();
    config.user(focal_id);
    if (strategies.size() != N) throw InvalidArgument("one strategy per user is required");
    if (request.focal_multiplicities.empty()) throw InvalidArgument("no focal oracle counts requested");
    for (auto c : request.focal_multiplicities)
        if (c < 1) throw InvalidArgument("focal oracle count must be at least 1");

    const std::uint64_t terms = enumeration_terms(K, N);
    if (terms > request.budget)
        throw BudgetExceeded("exact enumeration needs " + std::to_string(terms) + " terms, budget is " +
                             std::to_string(request.budget) + "; use the Monte Carlo estimator");

    OutcomeProfile profile;
    profile.multiplicities_ = request.focal_multiplicities;
    profile.has_error_ = request.with_error_rate;

    // Group the other users by allocation (sorted, so permuted allocations
    // with equal factor share a group).
    std::map<std::vector<std::uint32_t>, std::size_t> group_index;
    std::vector<std::size_t> group_size;
    std::vector<std::size_t> member_group;
    detail::EnumerationPlan plan;
    plan.num_classes = K;
    for (std::size_t n = 0; n < N; ++n) {
        if (n + 1 == focal_id) continue;
        strategies[n].check_feasible(config.users()[n]);
        std::vector<std::uint32_t> alloc(strategies[n].allocation().begin(), strategies[n].allocation().end());
        std::sort(alloc.begin(), alloc.end(), std::greater<>());
        auto [it, inserted] = group_index.try_emplace(alloc, group_size.size());
        if (inserted) {
            group_size.push_back(0);
            profile.group_allocations_.push_back(alloc);
        }
        ++group_size[it->second];
        member_group.push_back(it->second);
        plan.vote_weight.push_back(strategies[n].oracle_count());
    }
    const std::size_t groups = group_size.size();
    std::vector<std::size_t> radix(groups, 1);
    std::uint64_t keys = 1;
    for (std::size_t g = 0; g < groups; ++g) {
        radix[g] = static_cast<std::size_t>(keys);
        keys *= group_size[g] + 1;
        if (keys * request.focal_multiplicities.size() > kMaxProfileCells)
            throw BudgetExceeded("too many distinct agreeing-stake histograms for an exact profile; use Monte Carlo");
    }
    profile.keys_ = static_cast<std::size_t>(keys);
    for (auto g : member_group) plan.key_weight.push_back(radix[g]);
    profile.key_digits_.resize(profile.keys_ * groups);
    for (std::size_t key = 0; key < profile.keys_; ++key) {
        std::size_t rest = key;
        for (std::size_t g = 0; g < groups; ++g) {
            profile.key_digits_[key * groups + g] = static_cast<std::uint32_t>(rest % (group_size[g] + 1));
            rest /= group_size[g] + 1;
        }
    }

    plan.others = plan.vote_weight.size();
    plan.prior.assign(config.prior().values().begin(), config.prior().values().end());
    for (std::size_t t = 0; t < K; ++t)
        for (std::size_t l = 0; l < K; ++l) plan.confusion.push_back(config.confusion()(t, l));
    plan.focal_multiplicities = request.focal_multiplicities;
    plan.keys = profile.keys_;
    plan.with_error = request.with_error_rate;

    // Chunking depends only on the problem, never on the thread count, so
    // the in-order reduction below is reproducible.
    const std::uint64_t cells = keys * request.focal_multiplicities.size();
    std::size_t chunks = 1;
    while (plan.fixed_digits < plan.others && chunks < 64 && chunks * K * cells <= (1ULL << 23)) {
        chunks *= K;
        ++plan.fixed_digits;
    }

    std::vector<detail::ChunkTotals> partial(chunks);
    parallel::for_each_index(chunks, [&](std::size_t c) { detail::enumerate_chunk(plan, c, partial[c]); });

    const std::size_t slots = request.focal_multiplicities.size();
    profile.weights_.assign(slots * profile.keys_, 0.0);
    profile.error_.assign(slots, 0.0);
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < p.weights.size(); ++i) profile.weights_[i] += p.weights[i];
        for (std::size_t s = 0; s < slots; ++s) profile.error_[s] += p.error[s];
    }
    return profile;
}

}  // namespace feedguard
