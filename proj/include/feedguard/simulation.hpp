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

// Monte Carlo plumbing: reproducible chunked sampling of reporting rounds.
//
// Samples are split into fixed-size chunks, each with its own generator
// seeded from (seed, stream, chunk). Chunk statistics are merged in chunk
// order, so results are independent of the number of worker threads.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "feedguard/aggregation.hpp"
#include "feedguard/detail/parallel.hpp"
#include "feedguard/model.hpp"

namespace feedguard {

inline constexpr std::uint64_t kDefaultMonteCarloSamples = 1'000'000ULL;
inline constexpr std::uint64_t kDefaultSeed = 20240607ULL;

/// Welford accumulator with Chan's pairwise merge.
class RunningStats {
  public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningStats& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count_);
        const double n2 = static_cast<double>(other.count_);
        const double delta = other.mean_ - mean_;
        const double n = n1 + n2;
        mean_ += delta * n2 / n;
        m2_ += other.m2_ + delta * delta * n1 * n2 / n;
        count_ += other.count_;
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double std_error() const { return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0; }

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

namespace simulation {

inline constexpr std::uint64_t kChunkSize = 1ULL << 14;

enum class Stream : std::uint32_t { payoff = 1, error_rate = 2, synthetic_corpus = 3 };

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(chunk),
                      static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

/// Runs `samples` trials; trial(rng) returns one observation.
template <typename MakeTrial>
RunningStats run_chunked(std::uint64_t samples, std::uint64_t seed, Stream stream, MakeTrial&& make_trial) {
    const std::uint64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<RunningStats> partial(chunks);
    parallel::for_each_index(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        auto rng = make_rng(seed, stream, c);
        auto trial = make_trial();
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t end = std::min(samples, begin + kChunkSize);
        RunningStats stats;
        for (std::uint64_t i = begin; i < end; ++i) stats.add(trial(rng));
        partial[c] = stats;
    });
    RunningStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

/// Draws the truth and one report per user, then runs the majority vote
/// with a random tie-break. Buffers are reused across rounds.
class RoundSampler {
  public:
    RoundSampler(const SystemConfig& config, std::span<const Strategy> strategies) : config_(&config) {
        profile_.per_user_reports.resize(strategies.size());
        for (const auto& s : strategies) profile_.multiplicities.push_back(static_cast<std::uint32_t>(s.oracle_count()));
    }

    template <typename Rng>
    void draw(Rng& rng) {
        truth_ = ClassLabel{sample_index(config_->prior().values(), rng)};
        for (auto& r : profile_.per_user_reports) r = sample_report(config_->confusion(), truth_, rng);
        result_ = majority_vote(profile_, config_->num_classes(), rng);
    }

    ClassLabel truth() const { return truth_; }
    ClassLabel decided() const { return *result_.sampled_output; }
    std::span<const ClassLabel> reports() const { return profile_.per_user_reports; }

  private:
    const SystemConfig* config_;
    VoteProfile profile_;
    ClassLabel truth_;
    AggregateResult result_;
};

}  // namespace simulation
}  // namespace feedguard
