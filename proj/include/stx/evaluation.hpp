/*
 * Copyright 2026 The stx authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Scoring and protocols: per-class precision/recall/F1, the two aggregate
// rows (macro = unweighted mean over classes, micro = pooled counts), and
// the stratified k-fold splitter. Macro F1 is the mean of per-class F1
// values — NOT the F1 of macro precision and macro recall; the two differ
// and reports carry the former.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"

namespace stx {

struct ConfusionCounts {
    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
    };
    std::map<std::string, Counts> per_class;
    std::size_t total = 0;
};

inline ConfusionCounts confusion(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& truth) {
    if (predictions.size() != truth.size()) {
        throw std::invalid_argument("confusion: predictions/truth length mismatch");
    }
    ConfusionCounts c;
    c.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predictions[i] == truth[i]) {
            ++c.per_class[truth[i]].tp;
        } else {
            ++c.per_class[predictions[i]].fp;
            ++c.per_class[truth[i]].fn;
        }
    }
    return c;
}

struct ClassMetrics {
    std::string category;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct AggregateMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> rows;  // sorted by category
    AggregateMetrics macro;          // "Category Average"
    AggregateMetrics micro;          // "Absolute Average"
    std::size_t total = 0;
    json config = json::object();    // run config snapshot, filled by callers
};

/// Unweighted means over classes that actually occur (support > 0) — the
/// Category Average convention, zero rows included.
inline AggregateMetrics macro_average(const std::vector<ClassMetrics>& rows) {
    AggregateMetrics m;
    std::size_t n = 0;
    for (const ClassMetrics& r : rows) {
        if (r.support == 0) continue;
        m.precision += r.precision;
        m.recall += r.recall;
        m.f1 += r.f1;
        ++n;
    }
    if (n) {
        m.precision /= static_cast<double>(n);
        m.recall /= static_cast<double>(n);
        m.f1 /= static_cast<double>(n);
    }
    return m;
}

/// Support-weighted pooling of per-class recalls: Σ R_c·support_c / Σ support_c.
/// For single-label predictions this equals accuracy (micro recall).
inline double pooled_recall(const std::vector<ClassMetrics>& rows) {
    double num = 0.0, den = 0.0;
    for (const ClassMetrics& r : rows) {
        num += r.recall * static_cast<double>(r.support);
        den += static_cast<double>(r.support);
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Score predictions against truth. Zero-denominator conventions: P, R and
/// F1 are all 0 where undefined, which is how all-miss classes show up as
/// 0.00 rows rather than gaps.
inline MetricsReport score(const std::vector<std::string>& predictions,
                           const std::vector<std::string>& truth) {
    if (truth.empty()) throw std::invalid_argument("score: empty truth");
    ConfusionCounts c = confusion(predictions, truth);

    MetricsReport report;
    report.total = c.total;
    std::size_t pooled_tp = 0, pooled_fp = 0, pooled_fn = 0;
    for (const auto& [cls, cnt] : c.per_class) {
        ClassMetrics row;
        row.category = cls;
        row.support = cnt.tp + cnt.fn;
        double pd = static_cast<double>(cnt.tp + cnt.fp);
        double rd = static_cast<double>(cnt.tp + cnt.fn);
        row.precision = pd > 0.0 ? static_cast<double>(cnt.tp) / pd : 0.0;
        row.recall = rd > 0.0 ? static_cast<double>(cnt.tp) / rd : 0.0;
        double pr = row.precision + row.recall;
        row.f1 = pr > 0.0 ? 2.0 * row.precision * row.recall / pr : 0.0;
        report.rows.push_back(std::move(row));
        pooled_tp += cnt.tp;
        pooled_fp += cnt.fp;
        pooled_fn += cnt.fn;
    }
    report.macro = macro_average(report.rows);
    double mpd = static_cast<double>(pooled_tp + pooled_fp);
    double mrd = static_cast<double>(pooled_tp + pooled_fn);
    report.micro.precision = mpd > 0.0 ? static_cast<double>(pooled_tp) / mpd : 0.0;
    report.micro.recall = mrd > 0.0 ? static_cast<double>(pooled_tp) / mrd : 0.0;
    double mpr = report.micro.precision + report.micro.recall;
    report.micro.f1 = mpr > 0.0 ? 2.0 * report.micro.precision * report.micro.recall / mpr : 0.0;
    return report;
}

/// Per class, indices are seed-shuffled and dealt round-robin into k folds,
/// so per-fold class counts differ by at most 1. Fold contents come back
/// sorted. Requires every class to have at least k members.
inline std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<std::string>& labels,
                                                              std::size_t k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("stratified_kfold: k must be >= 1");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [cls, idx] : by_class) {
        if (idx.size() < k) {
            throw StratificationError(cls, "class '" + cls + "' has " + std::to_string(idx.size()) +
                                               " sample(s); need at least " + std::to_string(k) +
                                               " for " + std::to_string(k) + "-fold CV");
        }
    }
    std::vector<std::vector<std::size_t>> folds(k);
    for (auto& [cls, idx] : by_class) {
        Rng rng(derive_seed(seed, "fold", cls));
        shuffle(idx, rng);
        for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

/// Average per-fold reports into one: metric values are unweighted fold
/// means, supports and totals are summed (folds partition the corpus).
inline MetricsReport mean_report(const std::vector<MetricsReport>& folds) {
    if (folds.empty()) throw std::invalid_argument("mean_report: no folds");
    std::map<std::string, ClassMetrics> merged;
    std::map<std::string, std::size_t> seen;
    MetricsReport mean;
    for (const MetricsReport& fold : folds) {
        for (const ClassMetrics& row : fold.rows) {
            ClassMetrics& acc = merged[row.category];
            acc.category = row.category;
            acc.precision += row.precision;
            acc.recall += row.recall;
            acc.f1 += row.f1;
            acc.support += row.support;
            ++seen[row.category];
        }
        mean.macro.precision += fold.macro.precision;
        mean.macro.recall += fold.macro.recall;
        mean.macro.f1 += fold.macro.f1;
        mean.micro.precision += fold.micro.precision;
        mean.micro.recall += fold.micro.recall;
        mean.micro.f1 += fold.micro.f1;
        mean.total += fold.total;
    }
    for (auto& [cls, acc] : merged) {
        double n = static_cast<double>(seen[cls]);
        acc.precision /= n;
        acc.recall /= n;
        acc.f1 /= n;
        mean.rows.push_back(acc);
    }
    double nf = static_cast<double>(folds.size());
    mean.macro.precision /= nf;
    mean.macro.recall /= nf;
    mean.macro.f1 /= nf;
    mean.micro.precision /= nf;
    mean.micro.recall /= nf;
    mean.micro.f1 /= nf;
    return mean;
}

/// The scatter behind the category-size/F1 comparison: (support, f1) pairs
/// sorted by support.
inline std::vector<std::pair<std::size_t, double>> category_size_curve(const MetricsReport& report) {
    std::vector<std::pair<std::size_t, double>> curve;
    curve.reserve(report.rows.size());
    for (const ClassMetrics& r : report.rows) curve.emplace_back(r.support, r.f1);
    std::stable_sort(curve.begin(), curve.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return curve;
}

// ---------------------------------------------------------------------------
// report serialization

inline json report_to_json(const MetricsReport& report) {
    json rows = json::array();
    for (const ClassMetrics& r : report.rows) {
        rows.push_back(json{{"category", r.category},
                            {"precision", r.precision},
                            {"recall", r.recall},
                            {"f1", r.f1},
                            {"support", r.support}});
    }
    return json{{"rows", rows},
                {"macro", {{"precision", report.macro.precision},
                           {"recall", report.macro.recall},
                           {"f1", report.macro.f1}}},
                {"micro", {{"precision", report.micro.precision},
                           {"recall", report.micro.recall},
                           {"f1", report.micro.f1}}},
                {"total", report.total},
                {"config", report.config}};
}

inline MetricsReport report_from_json(const json& j) {
    MetricsReport report;
    for (const json& r : j.at("rows")) {
        report.rows.push_back(ClassMetrics{r.at("category").get<std::string>(),
                                           r.at("precision").get<double>(),
                                           r.at("recall").get<double>(), r.at("f1").get<double>(),
                                           r.at("support").get<std::size_t>()});
    }
    report.macro = {j.at("macro").at("precision").get<double>(),
                    j.at("macro").at("recall").get<double>(), j.at("macro").at("f1").get<double>()};
    report.micro = {j.at("micro").at("precision").get<double>(),
                    j.at("micro").at("recall").get<double>(), j.at("micro").at("f1").get<double>()};
    report.total = j.at("total").get<std::size_t>();
    if (j.contains("config")) report.config = j.at("config");
    return report;
}

namespace detail {

inline std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// CSV in the familiar report shape: per-class rows first, then the
/// Category Average (macro) and Absolute Average (micro) rows. Values are
/// fixed to 4 decimals. A leading comment line references the producing
/// run's manifest.
inline std::string report_to_csv(const MetricsReport& report, const std::string& manifest_hash) {
    std::string out;
    if (!manifest_hash.empty()) out += "# manifest: " + manifest_hash + "\n";
    out += "category,precision,recall,f1,support\n";
    for (const ClassMetrics& r : report.rows) {
        out += detail::csv_escape(r.category) + ',' + detail::fmt4(r.precision) + ',' +
               detail::fmt4(r.recall) + ',' + detail::fmt4(r.f1) + ',' + std::to_string(r.support) +
               '\n';
    }
    out += "Category Average," + detail::fmt4(report.macro.precision) + ',' +
           detail::fmt4(report.macro.recall) + ',' + detail::fmt4(report.macro.f1) + ',' +
           std::to_string(report.total) + '\n';
    out += "Absolute Average," + detail::fmt4(report.micro.precision) + ',' +
           detail::fmt4(report.micro.recall) + ',' + detail::fmt4(report.micro.f1) + ',' +
           std::to_string(report.total) + '\n';
    return out;
}

}  // namespace stx
