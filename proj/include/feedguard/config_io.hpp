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

// JSON documents: system configuration, optional experiment section, Nash
// certificates and the confusion-matrix fragment written by ingestion.
//
//   {
//     "num_classes": 5,
//     "prior": [0.2, 0.2, 0.2, 0.2, 0.2],          (optional, default uniform)
//     "confusion": [[...], ...],                    (row = true class)
//     "users": [{"id": 1, "stake": 8}, ...],
//     "total_reward": 1,                            (optional, default 1)
//     "experiment": {                               (optional)
//       "focal_user": 1, "c_values": [1, 2], "d_values": [1, "opt"],
//       "method": "exact", "samples": 1000000, "seed": 7
//     }
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "feedguard/error.hpp"
#include "feedguard/ingest.hpp"
#include "feedguard/model.hpp"
#include "feedguard/solver.hpp"

namespace feedguard {

using json = nlohmann::json;

/// Exponent list entry: a number, or the token "opt" for the solved d_opt.
using ExponentEntry = std::variant<double, std::monostate>;

struct ExperimentSection {
    std::optional<std::size_t> focal_user;
    std::optional<std::vector<std::uint32_t>> c_values;
    std::optional<std::vector<ExponentEntry>> d_values;
    std::optional<std::string> method;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> seed;
};

struct ConfigFile {
    ConfigDocument document;
    std::optional<ExperimentSection> experiment;
};

namespace detail {

template <typename T>
T get_field(const json& j, const char* key, const char* what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config field '") + key + "' (" + what + "): " + e.what());
    }
}

inline ExponentEntry parse_exponent(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "opt") return std::monostate{};
    throw ParseError("d values must be numbers or \"opt\"");
}

}  // namespace detail

inline ConfigFile parse_config(const json& j) {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    ConfigFile out;
    auto& doc = out.document;
    doc.num_classes = detail::get_field<std::size_t>(j, "num_classes", "positive integer");
    if (j.contains("prior") && !j.at("prior").is_null())
        doc.prior = detail::get_field<std::vector<double>>(j, "prior", "list of reals");
    doc.confusion = detail::get_field<std::vector<std::vector<double>>>(j, "confusion", "row-major K x K matrix");
    const json& users = j.at("users");
    if (!users.is_array()) throw ParseError("config field 'users' must be a list");
    for (const auto& u : users) {
        if (!u.is_object()) throw ParseError("each user must be an object {id, stake}");
        doc.users.emplace_back(detail::get_field<std::int64_t>(u, "id", "integer"),
                               detail::get_field<double>(u, "stake", "integer stake"));
    }
    if (j.contains("total_reward")) doc.total_reward = detail::get_field<double>(j, "total_reward", "positive real");

    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        if (!e.is_object()) throw ParseError("'experiment' must be an object");
        ExperimentSection ex;
        if (e.contains("focal_user")) ex.focal_user = detail::get_field<std::size_t>(e, "focal_user", "user id");
        if (e.contains("c_values"))
            ex.c_values = detail::get_field<std::vector<std::uint32_t>>(e, "c_values", "list of oracle counts");
        if (e.contains("d_values")) {
            if (!e.at("d_values").is_array()) throw ParseError("'d_values' must be a list");
            ex.d_values.emplace();
            for (const auto& v : e.at("d_values")) ex.d_values->push_back(detail::parse_exponent(v));
        }
        if (e.contains("method")) ex.method = detail::get_field<std::string>(e, "method", "exact or mc");
        if (e.contains("samples")) ex.samples = detail::get_field<std::uint64_t>(e, "samples", "sample count");
        if (e.contains("seed")) ex.seed = detail::get_field<std::uint64_t>(e, "seed", "integer seed");
        out.experiment = std::move(ex);
    }
    return out;
}

inline ConfigFile load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline json to_json(const ConfigDocument& doc) {
    json j;
    j["num_classes"] = doc.num_classes;
    if (doc.prior) j["prior"] = *doc.prior;
    j["confusion"] = doc.confusion;
    j["users"] = json::array();
    for (const auto& [id, stake] : doc.users) j["users"].push_back({{"id", id}, {"stake", stake}});
    j["total_reward"] = doc.total_reward;
    return j;
}

inline json to_json(const NashCertificate& cert) {
    json checks = json::array();
    for (const auto& c : cert.checks)
        checks.push_back(
            {{"n", c.user}, {"c", c.c}, {"payoff_single", c.payoff_single}, {"payoff_mirror", c.payoff_mirror}});
    return json{{"d", cert.d}, {"checks", std::move(checks)}, {"satisfied", cert.satisfied}};
}

inline json to_json(const IngestReport& r) {
    return json{{"input_records", r.input_records},
                {"dropped_without_gold", r.dropped_without_gold},
                {"dropped_low_participation", r.dropped_low_participation},
                {"dropped_annotators", r.dropped_annotators},
                {"gold_tasks", r.gold_tasks},
                {"participation_threshold", r.participation_threshold},
                {"participation_basis", r.participation_basis},
                {"row_counts", r.row_counts}};
}

}  // namespace feedguard
