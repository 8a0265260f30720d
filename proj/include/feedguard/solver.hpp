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

// Grid search for the smallest reward exponent d at which no user gains by
// splitting its stake over several mirrored oracles, given that everyone
// else runs a single oracle.
//
// The search walks d = start, start + eps, start + 2 eps, ... and at each
// grid point checks every (user n, oracle count c in 2..s_n). The first grid
// point with no violation is returned. Exact checks use one outcome profile
// per user, so each grid point costs O(sum of stakes x histogram keys).

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "feedguard/enumeration.hpp"
#include "feedguard/error.hpp"
#include "feedguard/payoff.hpp"

namespace feedguard {

struct SolverSettings {
    double epsilon = 0.01;
    double d_max = 16.0;
    double starting_d = 1.0;

    /// Unset: exact when the enumeration budget allows, Monte Carlo otherwise.
    std::optional<Method> method;
    std::uint64_t samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t budget = kDefaultEnumerationBudget;
    /// Monte Carlo checks only fail when the gain exceeds this many standard errors.
    double mc_margin_sigmas = 4.0;
    /// Exact checks tolerate rounding of this size (times R).
    double tolerance = 1e-12;
    /// Keep scanning past d_opt up to d_max and record grid points that fail again.
    bool audit = true;

    void validate() const {
        if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
        if (!(starting_d >= 1.0)) throw InvalidArgument("starting d must be at least 1");
        if (!(d_max > starting_d)) throw InvalidArgument("d_max must exceed the starting d");
    }

    double grid_point(std::uint64_t i) const { return starting_d + static_cast<double>(i) * epsilon; }
    bool within_range(double d) const { return d <= d_max * (1.0 + 1e-12); }
};

struct NashCheck {
    std::size_t user = 1;
    std::uint32_t c = 2;
    double payoff_single = 0.0;
    double payoff_mirror = 0.0;
    double slack = 0.0;  // numerical allowance used for this check

    double gain() const { return payoff_mirror - payoff_single; }
    bool holds() const { return payoff_mirror <= payoff_single + slack; }
};

struct NashCertificate {
    double d = 1.0;
    std::vector<NashCheck> checks;
    bool satisfied = true;
    Method method = Method::exact;

    /// The check with the largest mirroring gain; earlier checks win near-ties.
    std::optional<NashCheck> tightest() const {
        std::optional<NashCheck> best;
        for (const auto& c : checks) {
            if (!best || c.gain() > best->gain() + 1e-12 * std::max(1.0, std::abs(best->gain()))) best = c;
        }
        return best;
    }
};

class NoFeasibleExponent : public Error {
  public:
    NoFeasibleExponent(const std::string& what, NashCertificate last) : Error(what), last_(std::move(last)) {}
    const NashCertificate& last_certificate() const { return last_; }

  private:
    NashCertificate last_;
};

struct SolverResult {
    double d_opt = 1.0;
    NashCertificate certificate;
    std::uint64_t grid_index = 0;
    /// Grid points above d_opt where the equilibrium condition failed again.
    std::vector<double> reversals;
};

/// Evaluates the equilibrium condition at arbitrary d for one configuration.
class NashEvaluator {
  public:
    NashEvaluator(const SystemConfig& config, const SolverSettings& settings) : config_(config), settings_(settings) {
        method_ = settings.method.value_or(Method::exact);
        const auto strategies = config.single_oracle_strategies();
        if (method_ == Method::exact) {
            try {
                for (const auto& u : config.users()) {
                    if (u.total_stake < 2) continue;
                    ProfileRequest request;
                    request.with_error_rate = false;
                    request.budget = settings.budget;
                    request.focal_multiplicities.clear();
                    for (std::uint32_t c = 1; c <= u.total_stake; ++c) request.focal_multiplicities.push_back(c);
                    profiles_.push_back({u.id, build_outcome_profile(config, u.id, strategies, request)});
                }
            } catch (const BudgetExceeded&) {
                if (settings.method) throw;
                profiles_.clear();
                method_ = Method::monte_carlo;
            }
        }
    }

    Method method() const { return method_; }

    NashCertificate evaluate(double d) const {
        if (!(d >= 1.0)) throw InvalidArgument("reward exponent d must be at least 1");
        NashCertificate cert;
        cert.d = d;
        cert.method = method_;
        const double r = config_.total_reward();
        if (method_ == Method::exact) {
            for (const auto& [user, profile] : profiles_) {
                const auto den = profile.denominators(d);
                const std::uint32_t stake = config_.user(user).total_stake;
                const double single = profile.payoff(0, power_factor(stake, d), den) * r;
                for (std::uint32_t c = 2; c <= stake; ++c) {
                    const double f = allocation_factor(Strategy::concentrated(stake, c).allocation(), d);
                    const double mirror = profile.payoff(c - 1, f, den) * r;
                    cert.checks.push_back(NashCheck{user, c, single, mirror, settings_.tolerance * r});
                }
            }
        } else {
            EvaluationOptions options{Method::monte_carlo, settings_.samples, settings_.seed, settings_.budget};
            for (const auto& u : config_.users()) {
                if (u.total_stake < 2) continue;
                const auto curve = payoff_curve(config_, u.id, d, options);
                for (std::uint32_t c = 2; c <= u.total_stake; ++c) {
                    const double se = std::hypot(curve[0].std_error, curve[c - 1].std_error);
                    cert.checks.push_back(
                        NashCheck{u.id, c, curve[0].value, curve[c - 1].value, settings_.mc_margin_sigmas * se});
                }
            }
        }
        for (const auto& c : cert.checks)
            if (!c.holds()) cert.satisfied = false;
        return cert;
    }

  private:
    struct UserProfileTable {
        std::size_t user;
        OutcomeProfile profile;
    };

    const SystemConfig& config_;
    SolverSettings settings_;
    Method method_ = Method::exact;
    std::vector<UserProfileTable> profiles_;
};

/// Checks the single-oracle equilibrium condition at a given d.
inline NashCertificate verify_nash(const SystemConfig& config, double d, const SolverSettings& settings = {}) {
    return NashEvaluator(config, settings).evaluate(d);
}

inline SolverResult find_d_opt(const SystemConfig& config, const SolverSettings& settings = {}) {
    settings.validate();
    const NashEvaluator evaluator(config, settings);
    std::optional<NashCertificate> last;
    for (std::uint64_t i = 0;; ++i) {
        const double d = settings.grid_point(i);
        if (!settings.within_range(d)) break;
        auto cert = evaluator.evaluate(d);
        if (cert.satisfied) {
            SolverResult result{d, std::move(cert), i, {}};
            if (settings.audit && evaluator.method() == Method::exact) {
                for (std::uint64_t j = i + 1;; ++j) {
                    const double later = settings.grid_point(j);
                    if (!settings.within_range(later)) break;
                    if (!evaluator.evaluate(later).satisfied) result.reversals.push_back(later);
                }
            }
            return result;
        }
        last = std::move(cert);
    }
    std::ostringstream msg;
    msg << "no d <= " << settings.d_max << " makes single-oracle participation an equilibrium";
    if (last) {
        if (auto t = last->tightest()) {
            msg.precision(12);
            msg << "; tightest violation at d=" << last->d << ": user " << t->user << " with " << t->c
                << " oracles earns " << t->payoff_mirror << " vs " << t->payoff_single;
        }
    }
    throw NoFeasibleExponent(msg.str(), last.value_or(NashCertificate{}));
}

/// Runs the search treating every observed oracle as its own user.
inline SolverResult find_d_opt_from_oracle_stakes(std::span<const std::uint32_t> oracle_stakes,
                                                  const ConfusionMatrix& confusion, std::size_t num_classes,
                                                  const SolverSettings& settings = {}) {
    if (confusion.size() != num_classes) throw InvalidArgument("confusion dimension differs from K");
    if (oracle_stakes.empty()) throw InvalidArgument("no oracle stakes given");
    SystemConfig config(confusion, std::vector<std::uint32_t>(oracle_stakes.begin(), oracle_stakes.end()));
    return find_d_opt(config, settings);
}

}  // namespace feedguard
