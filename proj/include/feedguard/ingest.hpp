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

// Pooled confusion-matrix estimation from gold-labelled annotation records.
//
// Records without a gold label are dropped, then annotators whose surviving
// record count is below min_participation x (number of distinct gold-labelled
// tasks). The remaining records are counted per (gold, label) and the rows
// normalised.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "feedguard/error.hpp"
#include "feedguard/model.hpp"

namespace feedguard {

struct AnnotationRecord {
    std::string task_id;
    std::string annotator_id;
    ClassLabel label;
    std::optional<ClassLabel> gold_label;
};

struct IngestSettings {
    double min_participation = 0.1;
    double smoothing = 0.0;
    std::map<std::string, std::size_t> label_map;  // raw label -> 1-based class

    void validate() const {
        if (!(min_participation > 0.0 && min_participation <= 1.0))
            throw InvalidArgument("min_participation must lie in (0, 1]");
        if (!(smoothing >= 0.0)) throw InvalidArgument("smoothing must be nonnegative");
    }
};

struct IngestReport {
    std::size_t input_records = 0;
    std::size_t dropped_without_gold = 0;
    std::size_t dropped_low_participation = 0;
    std::vector<std::string> dropped_annotators;  // sorted
    std::size_t gold_tasks = 0;                   // participation denominator
    double participation_threshold = 0.0;         // records needed to be kept
    std::vector<std::vector<double>> row_counts;  // before smoothing
    std::string participation_basis = "distinct gold-labelled tasks";
};

struct ConfusionEstimate {
    ConfusionMatrix matrix;
    IngestReport report;
};

inline ConfusionEstimate estimate_confusion(const std::vector<AnnotationRecord>& records,
                                            const IngestSettings& settings, std::size_t num_classes) {
    settings.validate();
    if (num_classes < 2) throw InvalidArgument("estimation needs K >= 2");
    IngestReport report;
    report.input_records = records.size();

    std::vector<const AnnotationRecord*> gold;
    std::set<std::string> tasks;
    std::map<std::string, std::size_t> per_annotator;
    for (const auto& r : records) {
        if (r.label.index >= num_classes || (r.gold_label && r.gold_label->index >= num_classes))
            throw InvalidArgument("record label outside 1..K");
        if (!r.gold_label) {
            ++report.dropped_without_gold;
            continue;
        }
        gold.push_back(&r);
        tasks.insert(r.task_id);
        ++per_annotator[r.annotator_id];
    }
    report.gold_tasks = tasks.size();
    report.participation_threshold = settings.min_participation * static_cast<double>(tasks.size());
    for (const auto& [annotator, n] : per_annotator)
        if (static_cast<double>(n) < report.participation_threshold) report.dropped_annotators.push_back(annotator);

    const std::set<std::string> dropped(report.dropped_annotators.begin(), report.dropped_annotators.end());
    report.row_counts.assign(num_classes, std::vector<double>(num_classes, 0.0));
    std::size_t kept = 0;
    for (const auto* r : gold) {
        if (dropped.contains(r->annotator_id)) {
            ++report.dropped_low_participation;
            continue;
        }
        report.row_counts[r->gold_label->index][r->label.index] += 1.0;
        ++kept;
    }
    if (kept == 0) throw InvalidArgument("no annotation records survive filtering");

    std::vector<std::vector<double>> rows = report.row_counts;
    for (std::size_t k = 0; k < num_classes; ++k) {
        double sum = 0.0;
        for (auto& v : rows[k]) {
            v += settings.smoothing;
            sum += v;
        }
        if (!(sum > 0.0))
            throw InvalidArgument("gold class " + std::to_string(k + 1) +
                                  " has no surviving records; add smoothing or more data");
        for (auto& v : rows[k]) v /= sum;
    }
    return ConfusionEstimate{ConfusionMatrix(rows, true), std::move(report)};
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else if (ch != '\r') {
            fields.back() += ch;
        }
    }
    if (quoted) throw ParseError("unterminated quote in CSV line");
    return fields;
}

inline ClassLabel parse_label(const std::string& raw, const IngestSettings& settings, std::size_t num_classes,
                              std::size_t line_no) {
    std::size_t k = 0;
    if (!settings.label_map.empty()) {
        auto it = settings.label_map.find(raw);
        if (it == settings.label_map.end())
            throw ParseError("line " + std::to_string(line_no) + ": label '" + raw + "' is not in the label map");
        k = it->second;
    } else {
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), k);
        if (ec != std::errc{} || ptr != raw.data() + raw.size())
            throw ParseError("line " + std::to_string(line_no) + ": label '" + raw + "' is not a class index");
    }
    if (k < 1 || k > num_classes)
        throw ParseError("line " + std::to_string(line_no) + ": label " + std::to_string(k) + " outside 1.." +
                         std::to_string(num_classes));
    return ClassLabel::from_one_based(k);
}

}  // namespace detail

/// Reads `task_id,annotator_id,label,gold_label` records; an empty gold
/// field means the record has no gold label.
inline std::vector<AnnotationRecord> read_annotation_csv(std::istream& in, const IngestSettings& settings,
                                                         std::size_t num_classes) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("annotation CSV is empty");
    const auto header = detail::split_csv_line(line);
    const std::vector<std::string> expected{"task_id", "annotator_id", "label", "gold_label"};
    if (header != expected) throw ParseError("annotation CSV header must be task_id,annotator_id,label,gold_label");
    std::vector<AnnotationRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        AnnotationRecord rec;
        rec.task_id = std::move(fields[0]);
        rec.annotator_id = std::move(fields[1]);
        rec.label = detail::parse_label(fields[2], settings, num_classes, line_no);
        if (!fields[3].empty()) rec.gold_label = detail::parse_label(fields[3], settings, num_classes, line_no);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace feedguard
