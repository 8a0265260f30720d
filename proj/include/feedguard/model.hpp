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

// Domain types of a majority-vote data-feed system: classes, class prior,
// the shared confusion matrix, user stakes and oracle strategies.
//
// Conventions:
//  - ClassLabel stores a zero-based index. Files and the CLI use 1..K.
//  - Stakes are integers in units of the minimum stake (s_min = 1).
//  - Confusion rows are indexed by the true class and sum to one.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "feedguard/error.hpp"

namespace feedguard {

inline constexpr double kPriorSumTolerance = 1e-9;
inline constexpr double kRowSumTolerance = 1e-6;

struct ClassLabel {
    std::size_t index = 0;  // zero-based

    static ClassLabel from_one_based(std::size_t k) {
        if (k == 0) throw InvalidArgument("class labels are numbered from 1");
        return ClassLabel{k - 1};
    }
    std::size_t one_based() const { return index + 1; }

    friend bool operator==(ClassLabel, ClassLabel) = default;
    friend auto operator<=>(ClassLabel, ClassLabel) = default;
};

class ClassPrior {
  public:
    ClassPrior() = default;

    /// Uniform prior 1/K.
    static ClassPrior uniform(std::size_t num_classes) {
        if (num_classes == 0) throw InvalidArgument("prior needs at least one class");
        ClassPrior p;
        p.probabilities_.assign(num_classes, 1.0 / static_cast<double>(num_classes));
        return p;
    }

    explicit ClassPrior(std::vector<double> probabilities) : probabilities_(std::move(probabilities)) {
        if (probabilities_.empty()) throw InvalidArgument("prior needs at least one class");
        double sum = 0.0;
        for (double v : probabilities_) {
            if (!(v >= 0.0)) throw InvalidArgument("prior entries must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kPriorSumTolerance) {
            std::ostringstream msg;
            msg << "prior sums to " << sum;
            throw InvalidArgument(msg.str());
        }
    }

    std::size_t size() const { return probabilities_.size(); }
    double operator[](std::size_t k) const { return probabilities_[k]; }
    std::span<const double> values() const { return probabilities_; }

  private:
    std::vector<double> probabilities_;
};

/// Row-stochastic K x K matrix; entry (k, l) is Pr(report = l | truth = k).
class ConfusionMatrix {
  public:
    ConfusionMatrix() = default;

    /// Builds from rows. Rows must sum to one within kRowSumTolerance unless
    /// `renormalize` is set, in which case each row is divided by its sum.
    explicit ConfusionMatrix(const std::vector<std::vector<double>>& rows, bool renormalize = false) {
        const std::size_t k = rows.size();
        if (k == 0) throw InvalidArgument("confusion matrix is empty");
        entries_.reserve(k * k);
        for (std::size_t r = 0; r < k; ++r) {
            if (rows[r].size() != k) {
                std::ostringstream msg;
                msg << "confusion row " << r + 1 << " has " << rows[r].size() << " entries, expected " << k;
                throw InvalidArgument(msg.str());
            }
            double sum = 0.0;
            for (double v : rows[r]) {
                if (!(v >= 0.0 && v <= 1.0) && !(renormalize && v >= 0.0)) {
                    std::ostringstream msg;
                    msg << "confusion row " << r + 1 << " has entry " << v << " outside [0,1]";
                    throw InvalidArgument(msg.str());
                }
                sum += v;
            }
            if (renormalize) {
                if (!(sum > 0.0)) {
                    std::ostringstream msg;
                    msg << "confusion row " << r + 1 << " cannot be renormalized";
                    throw InvalidArgument(msg.str());
                }
                for (double v : rows[r]) entries_.push_back(v / sum);
            } else {
                if (std::abs(sum - 1.0) > kRowSumTolerance) {
                    std::ostringstream msg;
                    msg << "row " << r + 1 << " sums to " << sum;
                    throw InvalidArgument(msg.str());
                }
                entries_.insert(entries_.end(), rows[r].begin(), rows[r].end());
            }
        }
        size_ = k;
    }

    static ConfusionMatrix identity(std::size_t k) {
        std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
        for (std::size_t i = 0; i < k; ++i) rows[i][i] = 1.0;
        return ConfusionMatrix(rows);
    }

    /// Symmetric matrix with `accuracy` on the diagonal and the rest spread evenly.
    static ConfusionMatrix symmetric(std::size_t k, double accuracy) {
        std::vector<std::vector<double>> rows(k, std::vector<double>(k, k > 1 ? (1.0 - accuracy) / double(k - 1) : 0.0));
        for (std::size_t i = 0; i < k; ++i) rows[i][i] = k > 1 ? accuracy : 1.0;
        return ConfusionMatrix(rows);
    }

    std::size_t size() const { return size_; }
    double operator()(std::size_t truth, std::size_t report) const { return entries_[truth * size_ + report]; }
    std::span<const double> row(std::size_t truth) const { return {entries_.data() + truth * size_, size_}; }

    std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out(size_);
        for (std::size_t r = 0; r < size_; ++r) out[r].assign(row(r).begin(), row(r).end());
        return out;
    }

    /// Every diagonal entry strictly exceeds the other entries of its row.
    bool weakly_accurate() const {
        for (std::size_t k = 0; k < size_; ++k)
            for (std::size_t l = 0; l < size_; ++l)
                if (l != k && !((*this)(k, k) > (*this)(k, l))) return false;
        return true;
    }

  private:
    std::size_t size_ = 0;
    std::vector<double> entries_;
};

struct UserProfile {
    std::size_t id = 1;             // 1..N
    std::uint32_t total_stake = 1;  // units of s_min
};

/// Per-oracle stake allocation of one user; mirrored oracles always report
/// the same value, so the allocation is all the aggregation layer needs.
class Strategy {
  public:
    Strategy() = default;
    explicit Strategy(std::vector<std::uint32_t> allocation) : allocation_(std::move(allocation)) {
        if (allocation_.empty()) throw InvalidArgument("a strategy needs at least one oracle");
        for (auto s : allocation_)
            if (s < 1) throw InvalidArgument("every oracle must stake at least s_min = 1");
    }

    static Strategy single(std::uint32_t stake) { return Strategy({stake}); }

    /// (stake - count + 1, 1, ..., 1).
    static Strategy concentrated(std::uint32_t total_stake, std::uint32_t oracle_count) {
        if (oracle_count < 1) throw InvalidArgument("oracle count must be at least 1");
        if (oracle_count > total_stake) {
            std::ostringstream msg;
            msg << "cannot run " << oracle_count << " oracles with stake " << total_stake;
            throw InfeasibleStrategy(msg.str());
        }
        std::vector<std::uint32_t> alloc(oracle_count, 1);
        alloc[0] = total_stake - oracle_count + 1;
        return Strategy(std::move(alloc));
    }

    std::size_t oracle_count() const { return allocation_.size(); }
    std::span<const std::uint32_t> allocation() const { return allocation_; }
    std::uint64_t staked() const {
        std::uint64_t s = 0;
        for (auto v : allocation_) s += v;
        return s;
    }

    /// Same oracle count and total stake, concentrated form. Idempotent.
    Strategy canonical() const {
        return concentrated(static_cast<std::uint32_t>(staked()), static_cast<std::uint32_t>(oracle_count()));
    }

    void check_feasible(const UserProfile& user) const {
        if (staked() > user.total_stake) {
            std::ostringstream msg;
            msg << "user " << user.id << " stakes " << staked() << " but owns " << user.total_stake;
            throw InfeasibleStrategy(msg.str());
        }
    }

    friend bool operator==(const Strategy&, const Strategy&) = default;

  private:
    std::vector<std::uint32_t> allocation_{1};
};

/// Raw, unvalidated contents of a configuration document.
struct ConfigDocument {
    std::size_t num_classes = 0;
    std::optional<std::vector<double>> prior;
    std::vector<std::vector<double>> confusion;
    std::vector<std::pair<std::int64_t, double>> users;  // (id, stake) as written
    double total_reward = 1.0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool weakly_accurate = false;

    bool valid() const { return violations.empty(); }
};

namespace detail {
inline std::string format_number(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}
}  // namespace detail

/// Lists every violated invariant of a configuration document.
inline ValidationReport validate_config(const ConfigDocument& doc) {
    ValidationReport report;
    auto& v = report.violations;
    const std::size_t k = doc.num_classes;
    if (k < 1) v.push_back("num_classes must be at least 1");

    bool square = doc.confusion.size() == k && k >= 1;
    if (doc.confusion.size() != k)
        v.push_back("confusion has " + std::to_string(doc.confusion.size()) + " rows, expected " + std::to_string(k));
    for (std::size_t r = 0; r < doc.confusion.size(); ++r) {
        const auto& row = doc.confusion[r];
        if (row.size() != k) {
            square = false;
            v.push_back("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " entries, expected " +
                        std::to_string(k));
            continue;
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!(row[c] >= 0.0 && row[c] <= 1.0))
                v.push_back("entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ") = " +
                            detail::format_number(row[c]) + " outside [0,1]");
            sum += row[c];
        }
        if (!(std::abs(sum - 1.0) <= kRowSumTolerance))
            v.push_back("row " + std::to_string(r + 1) + " sums to " + detail::format_number(sum));
    }

    if (doc.prior) {
        if (doc.prior->size() != k)
            v.push_back("prior has " + std::to_string(doc.prior->size()) + " entries, expected " + std::to_string(k));
        double sum = 0.0;
        for (double p : *doc.prior) {
            if (!(p >= 0.0)) v.push_back("prior entry " + detail::format_number(p) + " is negative");
            sum += p;
        }
        if (!(std::abs(sum - 1.0) <= kPriorSumTolerance)) v.push_back("prior sums to " + detail::format_number(sum));
    }

    if (doc.users.empty()) v.push_back("no users");
    std::vector<bool> seen(doc.users.size(), false);
    for (const auto& [id, stake] : doc.users) {
        if (id < 1 || static_cast<std::size_t>(id) > doc.users.size()) {
            v.push_back("user id " + std::to_string(id) + " outside 1.." + std::to_string(doc.users.size()));
        } else if (seen[static_cast<std::size_t>(id - 1)]) {
            v.push_back("user id " + std::to_string(id) + " is duplicated");
        } else {
            seen[static_cast<std::size_t>(id - 1)] = true;
        }
        if (!(stake >= 1.0) || stake != std::floor(stake) || stake > 4294967295.0)
            v.push_back("user " + std::to_string(id) + " stake " + detail::format_number(stake) +
                        " is not a positive integer multiple of s_min");
    }
    if (!(doc.total_reward > 0.0)) v.push_back("total_reward must be positive");

    if (square) {
        bool weak = true;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c)
                if (c != r && !(doc.confusion[r][r] > doc.confusion[r][c])) weak = false;
        report.weakly_accurate = weak;
    }
    return report;
}

/// Validated system description. Users are stored in id order.
class SystemConfig {
  public:
    SystemConfig() = default;

    SystemConfig(ConfusionMatrix confusion, std::vector<std::uint32_t> stakes, double total_reward = 1.0,
                 std::optional<ClassPrior> prior = std::nullopt)
        : confusion_(std::move(confusion)), total_reward_(total_reward) {
        if (confusion_.size() == 0) throw InvalidArgument("confusion matrix is empty");
        prior_ = prior ? std::move(*prior) : ClassPrior::uniform(confusion_.size());
        if (prior_.size() != confusion_.size()) throw InvalidArgument("prior and confusion dimensions differ");
        if (stakes.empty()) throw InvalidArgument("a system needs at least one user");
        if (!(total_reward_ > 0.0)) throw InvalidArgument("total reward must be positive");
        users_.reserve(stakes.size());
        for (std::size_t i = 0; i < stakes.size(); ++i) {
            if (stakes[i] < 1) throw InvalidArgument("stakes must be at least s_min = 1");
            users_.push_back(UserProfile{i + 1, stakes[i]});
        }
    }

    /// Throws InvalidArgument carrying every violation when the document is invalid.
    static SystemConfig from_document(const ConfigDocument& doc, bool renormalize = false) {
        ValidationReport report = validate_config(doc);
        if (renormalize) {
            std::erase_if(report.violations, [](const std::string& s) { return s.find(" sums to ") != std::string::npos && s.rfind("row ", 0) == 0; });
        }
        if (!report.valid()) {
            std::string msg = "invalid configuration:";
            for (const auto& s : report.violations) msg += "\n  " + s;
            throw InvalidArgument(msg);
        }
        std::vector<std::uint32_t> stakes(doc.users.size());
        for (const auto& [id, stake] : doc.users) stakes[static_cast<std::size_t>(id - 1)] = static_cast<std::uint32_t>(stake);
        std::optional<ClassPrior> prior;
        if (doc.prior) prior = ClassPrior(*doc.prior);
        return SystemConfig(ConfusionMatrix(doc.confusion, renormalize), std::move(stakes), doc.total_reward, prior);
    }

    ConfigDocument to_document() const {
        ConfigDocument doc;
        doc.num_classes = num_classes();
        doc.prior = std::vector<double>(prior_.values().begin(), prior_.values().end());
        doc.confusion = confusion_.rows();
        for (const auto& u : users_) doc.users.emplace_back(static_cast<std::int64_t>(u.id), double(u.total_stake));
        doc.total_reward = total_reward_;
        return doc;
    }

    std::size_t num_classes() const { return confusion_.size(); }
    std::size_t num_users() const { return users_.size(); }
    const ClassPrior& prior() const { return prior_; }
    const ConfusionMatrix& confusion() const { return confusion_; }
    std::span<const UserProfile> users() const { return users_; }
    double total_reward() const { return total_reward_; }

    const UserProfile& user(std::size_t id) const {
        if (id < 1 || id > users_.size()) throw InvalidArgument("unknown user id " + std::to_string(id));
        return users_[id - 1];
    }

    std::vector<std::uint32_t> stakes() const {
        std::vector<std::uint32_t> s;
        for (const auto& u : users_) s.push_back(u.total_stake);
        return s;
    }

    /// Every user on one oracle with its full stake.
    std::vector<Strategy> single_oracle_strategies() const {
        std::vector<Strategy> out;
        for (const auto& u : users_) out.push_back(Strategy::single(u.total_stake));
        return out;
    }

  private:
    ConfusionMatrix confusion_;
    ClassPrior prior_;
    std::vector<UserProfile> users_;
    double total_reward_ = 1.0;
};

inline ValidationReport validate_config(const SystemConfig& config) {
    return validate_config(config.to_document());
}

/// Inverse-CDF draw from a discrete distribution given by `weights` (sum 1).
template <typename Rng>
std::size_t sample_index(std::span<const double> weights, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    // rounding left u above the accumulated sum
    return last_positive;
}

/// Draws one oracle report for the given true class.
template <typename Rng>
ClassLabel sample_report(const ConfusionMatrix& confusion, ClassLabel truth, Rng& rng) {
    if (truth.index >= confusion.size()) throw InvalidArgument("truth label out of range");
    return ClassLabel{sample_index(confusion.row(truth.index), rng)};
}

}  // namespace feedguard
