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

// Command implementations behind the `feedguard` executable.
//
// Exit codes: 0 success, 1 domain failure (invalid or infeasible input,
// violated condition), 2 I/O or parse failure.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feedguard/config_io.hpp"
#include "feedguard/detail/parallel.hpp"
#include "feedguard/ingest.hpp"
#include "feedguard/metrics.hpp"
#include "feedguard/payoff.hpp"
#include "feedguard/solver.hpp"

namespace feedguard::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kDomainFailure = 1, kIoFailure = 2 };

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = kDefaultSeed;
    std::string tool_version = kToolVersion;
    std::string timestamp;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

/// Writes `content` to a temporary sibling and renames it into place.
inline void write_atomically(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw ParseError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ParseError("cannot move output into '" + path + "': " + ec.message());
    }
}

/// The manifest sits beside its output as `<output>.manifest.json`.
inline void write_manifest(const std::string& output_path, const RunManifest& m) {
    const json j{{"command", m.command},
                 {"config_path", m.config_path},
                 {"seed", m.seed},
                 {"tool_version", m.tool_version},
                 {"timestamp", m.timestamp.empty() ? utc_timestamp() : m.timestamp}};
    write_atomically(output_path + ".manifest.json", j.dump(2) + "\n");
}

/// Maps library exceptions onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    }
}

inline int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto file = load_config_file(config_path);
        const auto report = validate_config(file.document);
        out << "config: " << config_path << '\n';
        if (report.valid()) {
            out << "valid: yes\n";
        } else {
            out << "valid: no\n";
            for (const auto& v : report.violations) out << "  violation: " << v << '\n';
        }
        out << "weakly accurate: " << (report.weakly_accurate ? "yes" : "no") << '\n';
        return report.valid() ? kOk : kDomainFailure;
    });
}

struct PayoffArgs {
    std::string config_path;
    std::size_t user = 1;
    std::uint32_t c = 1;
    double d = 1.0;
    std::string method = "exact";
    std::uint64_t samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = kDefaultSeed;
};

inline int cmd_payoff(const PayoffArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto config = SystemConfig::from_document(load_config_file(args.config_path).document);
        const auto query = PayoffQuery::concentrated(config, args.user, args.c, args.d);
        const auto method = parse_method(args.method);
        const auto est = method == Method::exact ? expected_payoff_exact(query)
                                                 : expected_payoff_mc(query, args.samples, args.seed);
        const json j{{"user", args.user},        {"c", args.c},
                     {"d", args.d},              {"expected_payoff", est.value},
                     {"method", to_string(est.method)}, {"std_error", est.std_error},
                     {"samples", est.samples},   {"seed", args.seed}};
        out << j.dump(2) << '\n';
        return kOk;
    });
}

struct SolveArgs {
    std::string config_path;
    double epsilon = 0.01;
    double d_max = 16.0;
    bool from_oracle_stakes = false;
    std::vector<std::uint32_t> oracle_stakes;  // defaults to the config's user stakes
    std::string method = "auto";
    std::uint64_t samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = kDefaultSeed;
    std::string out_path;  // certificate document; empty = stdout only
};

inline SolverSettings solver_settings(double epsilon, double d_max, const std::string& method, std::uint64_t samples,
                                      std::uint64_t seed) {
    SolverSettings s;
    s.epsilon = epsilon;
    s.d_max = d_max;
    if (method != "auto") s.method = parse_method(method);
    s.samples = samples;
    s.seed = seed;
    return s;
}

inline int cmd_solve_d(const SolveArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto config = SystemConfig::from_document(load_config_file(args.config_path).document);
        const auto settings = solver_settings(args.epsilon, args.d_max, args.method, args.samples, args.seed);
        try {
            SolverResult result;
            if (args.from_oracle_stakes) {
                const auto stakes = args.oracle_stakes.empty() ? config.stakes() : args.oracle_stakes;
                result = find_d_opt_from_oracle_stakes(stakes, config.confusion(), config.num_classes(), settings);
            } else {
                result = find_d_opt(config, settings);
            }
            const std::string cert = to_json(result.certificate).dump(2) + "\n";
            if (!args.out_path.empty()) {
                write_atomically(args.out_path, cert);
                write_manifest(args.out_path,
                               RunManifest{"solve-d", args.config_path, args.seed, kToolVersion, utc_timestamp()});
            }
            out << std::setprecision(12) << "d_opt " << result.d_opt << '\n';
            out << "satisfied " << (result.certificate.satisfied ? "yes" : "no") << '\n';
            out << "grid_steps " << result.grid_index << '\n';
            out << "reversals " << result.reversals.size() << '\n';
            if (args.out_path.empty()) out << cert;
            return kOk;
        } catch (const NoFeasibleExponent& e) {
            err << "error: " << e.what() << '\n';
            return kDomainFailure;
        }
    });
}

struct SweepArgs {
    std::string config_path;
    std::optional<std::size_t> user;
    std::string c_range;  // "1..8", "1-8" or "1,2,4"
    std::string d_list;   // "1,1.2,opt"
    std::string method;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> seed;
    double epsilon = 0.01;  // grid step used to resolve "opt"
    std::string out_path;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) parts.push_back(cur);
    return parts;
}

inline std::uint32_t to_u32(const std::string& s) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &used);
    } catch (const std::exception&) {
        throw ParseError("'" + s + "' is not a nonnegative integer");
    }
    if (used != s.size()) throw ParseError("'" + s + "' is not a nonnegative integer");
    return static_cast<std::uint32_t>(v);
}

inline std::vector<std::uint32_t> parse_c_range(const std::string& s) {
    for (const char* sep : {"..", "-"}) {
        const auto pos = s.find(sep);
        if (pos != std::string::npos) {
            const auto lo = to_u32(s.substr(0, pos));
            const auto hi = to_u32(s.substr(pos + std::string(sep).size()));
            if (lo > hi) throw ParseError("empty oracle-count range '" + s + "'");
            std::vector<std::uint32_t> out;
            for (auto c = lo; c <= hi; ++c) out.push_back(c);
            return out;
        }
    }
    std::vector<std::uint32_t> out;
    for (const auto& p : split(s, ',')) out.push_back(to_u32(p));
    if (out.empty()) throw ParseError("empty oracle-count list");
    return out;
}

inline std::vector<ExponentEntry> parse_d_list(const std::string& s) {
    std::vector<ExponentEntry> out;
    for (const auto& p : split(s, ',')) {
        if (p == "opt") {
            out.emplace_back(std::monostate{});
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(p, &used);
        } catch (const std::exception&) {
            throw ParseError("'" + p + "' is not a number");
        }
        if (used != p.size()) throw ParseError("'" + p + "' is not a number");
        out.emplace_back(v);
    }
    if (out.empty()) throw ParseError("empty exponent list");
    return out;
}

}  // namespace detail

inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto file = load_config_file(args.config_path);
        const auto config = SystemConfig::from_document(file.document);
        const ExperimentSection ex = file.experiment.value_or(ExperimentSection{});

        ExperimentSpec spec{config, 1, {}, {}, Method::exact, kDefaultMonteCarloSamples, kDefaultSeed};
        spec.focal_user = args.user.value_or(ex.focal_user.value_or(1));
        const auto stake = config.user(spec.focal_user).total_stake;
        if (!args.c_range.empty()) {
            spec.c_values = detail::parse_c_range(args.c_range);
        } else if (ex.c_values) {
            spec.c_values = *ex.c_values;
        } else {
            for (std::uint32_t c = 1; c <= stake; ++c) spec.c_values.push_back(c);
        }
        std::vector<ExponentEntry> d_entries;
        if (!args.d_list.empty()) {
            d_entries = detail::parse_d_list(args.d_list);
        } else if (ex.d_values) {
            d_entries = *ex.d_values;
        } else {
            d_entries = {1.0};
        }
        spec.method = parse_method(!args.method.empty() ? args.method : ex.method.value_or("exact"));
        spec.samples = args.samples.value_or(ex.samples.value_or(kDefaultMonteCarloSamples));
        spec.seed = args.seed.value_or(ex.seed.value_or(kDefaultSeed));

        std::optional<double> d_opt;
        for (const auto& e : d_entries) {
            if (std::holds_alternative<double>(e)) {
                spec.d_values.push_back(std::get<double>(e));
                continue;
            }
            if (!d_opt) {
                SolverSettings settings;
                settings.epsilon = args.epsilon;
                settings.samples = spec.samples;
                settings.seed = spec.seed;
                if (spec.method == Method::monte_carlo) settings.method = Method::monte_carlo;
                settings.audit = false;
                try {
                    d_opt = find_d_opt(config, settings).d_opt;
                } catch (const NoFeasibleExponent& e) {
                    err << "error: " << e.what() << '\n';
                    return int(kDomainFailure);
                }
            }
            spec.d_values.push_back(*d_opt);
        }

        const auto rows = run_experiment(spec);
        std::ostringstream csv;
        write_sweep_csv(csv, rows);
        if (args.out_path.empty()) {
            out << csv.str();
        } else {
            write_atomically(args.out_path, csv.str());
            write_manifest(args.out_path,
                           RunManifest{"sweep", args.config_path, spec.seed, kToolVersion, utc_timestamp()});
            out << "wrote " << rows.size() << " rows to " << args.out_path << '\n';
        }
        if (d_opt) out << std::setprecision(12) << "d_opt " << *d_opt << '\n';
        return int(kOk);
    });
}

struct EstimateArgs {
    std::string records_path;
    std::size_t k = 2;
    double min_participation = 0.1;
    double smoothing = 0.0;
    std::string label_map;  // "neg=1,neu=2,pos=3"
    std::string out_path;
};

inline int cmd_estimate_cm(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        IngestSettings settings;
        settings.min_participation = args.min_participation;
        settings.smoothing = args.smoothing;
        for (const auto& pair : detail::split(args.label_map, ',')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) throw ParseError("label map entries look like raw=index, got '" + pair + "'");
            settings.label_map[pair.substr(0, eq)] = detail::to_u32(pair.substr(eq + 1));
        }
        std::ifstream in(args.records_path);
        if (!in) throw ParseError("cannot open records file '" + args.records_path + "'");
        const auto records = read_annotation_csv(in, settings, args.k);
        const auto estimate = estimate_confusion(records, settings, args.k);
        const json fragment{{"num_classes", args.k},
                            {"confusion", estimate.matrix.rows()},
                            {"ingest_report", to_json(estimate.report)}};
        const std::string text = fragment.dump(2) + "\n";
        if (args.out_path.empty()) {
            out << text;
        } else {
            write_atomically(args.out_path, text);
            write_manifest(args.out_path,
                           RunManifest{"estimate-cm", args.records_path, 0, kToolVersion, utc_timestamp()});
            out << "wrote confusion matrix to " << args.out_path << '\n';
        }
        return kOk;
    });
}

/// Parses argv and dispatches to one of the commands above.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Mirroring-attack analysis for majority-vote data-feed systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); never changes results");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    validate->add_option("config", validate_path, "Config JSON")->required();

    PayoffArgs payoff;
    auto* pay = app.add_subcommand("payoff", "Expected payoff of a user running c concentrated oracles");
    pay->add_option("config", payoff.config_path, "Config JSON")->required();
    pay->add_option("--user", payoff.user, "Focal user id");
    pay->add_option("--c", payoff.c, "Number of oracles of the focal user");
    pay->add_option("--d", payoff.d, "Reward exponent");
    pay->add_option("--method", payoff.method, "exact or mc");
    pay->add_option("--samples", payoff.samples, "Monte Carlo samples");
    pay->add_option("--seed", payoff.seed, "Monte Carlo seed");

    SolveArgs solve;
    std::string oracle_stakes;
    auto* sol = app.add_subcommand("solve-d", "Smallest d making single-oracle play an equilibrium");
    sol->add_option("config", solve.config_path, "Config JSON")->required();
    sol->add_option("--epsilon", solve.epsilon, "Grid step");
    sol->add_option("--d-max", solve.d_max, "Largest exponent tried");
    sol->add_flag("--from-oracle-stakes", solve.from_oracle_stakes, "Treat each oracle stake as a user");
    sol->add_option("--oracle-stakes", oracle_stakes, "Observed per-oracle stakes, comma separated");
    sol->add_option("--method", solve.method, "auto, exact or mc");
    sol->add_option("--samples", solve.samples, "Monte Carlo samples per check");
    sol->add_option("--seed", solve.seed, "Monte Carlo seed");
    sol->add_option("--out", solve.out_path, "Certificate JSON output");

    SweepArgs sweep;
    auto* swp = app.add_subcommand("sweep", "Payoff and error-rate table over (c, d)");
    swp->add_option("config", sweep.config_path, "Config JSON")->required();
    swp->add_option("--user", sweep.user, "Focal user id");
    swp->add_option("--c-range", sweep.c_range, "Oracle counts, e.g. 1..8 or 1,2,4");
    swp->add_option("--d-list", sweep.d_list, "Exponents, e.g. 1,1.2,opt");
    swp->add_option("--method", sweep.method, "exact or mc");
    swp->add_option("--samples", sweep.samples, "Monte Carlo samples");
    swp->add_option("--seed", sweep.seed, "Monte Carlo seed");
    swp->add_option("--epsilon", sweep.epsilon, "Grid step used to resolve 'opt'");
    swp->add_option("--out", sweep.out_path, "CSV output");

    EstimateArgs estimate;
    auto* est = app.add_subcommand("estimate-cm", "Estimate the confusion matrix from annotation records");
    est->add_option("records", estimate.records_path, "Records CSV")->required();
    est->add_option("--k", estimate.k, "Number of classes")->required();
    est->add_option("--min-participation", estimate.min_participation, "Minimum fraction of gold tasks");
    est->add_option("--smoothing", estimate.smoothing, "Additive pseudo-count");
    est->add_option("--label-map", estimate.label_map, "raw=index pairs, comma separated");
    est->add_option("--out", estimate.out_path, "Config fragment JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kIoFailure;
    }
    parallel::set_thread_count(threads);

    if (*validate) return cmd_validate(validate_path, out, err);
    if (*pay) return cmd_payoff(payoff, out, err);
    if (*sol) {
        const int code = guarded(err, [&] {
            for (const auto& s : detail::split(oracle_stakes, ',')) solve.oracle_stakes.push_back(detail::to_u32(s));
            return int(kOk);
        });
        if (code != kOk) return code;
        if (!solve.oracle_stakes.empty()) solve.from_oracle_stakes = true;
        return cmd_solve_d(solve, out, err);
    }
    if (*swp) return cmd_sweep(sweep, out, err);
    return cmd_estimate_cm(estimate, out, err);
}

}  // namespace feedguard::cli
