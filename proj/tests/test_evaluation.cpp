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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stx/errors.hpp"
#include "stx/evaluation.hpp"

#include "oracles.hpp"

using stx::MetricsReport;

namespace {

const stx::ClassMetrics* row_of(const MetricsReport& r, const std::string& cls) {
    for (const auto& row : r.rows) {
        if (row.category == cls) return &row;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("confusion tallies tp, fp, fn per class", "[evaluation]") {
    std::vector<std::string> truth = {"a", "a", "b", "b", "c"};
    std::vector<std::string> pred = {"a", "b", "b", "c", "c"};
    stx::ConfusionCounts c = stx::confusion(pred, truth);
    CHECK(c.total == 5);
    CHECK(c.per_class.at("a").tp == 1);
    CHECK(c.per_class.at("a").fn == 1);
    CHECK(c.per_class.at("a").fp == 0);
    CHECK(c.per_class.at("b").tp == 1);
    CHECK(c.per_class.at("b").fp == 1);
    CHECK(c.per_class.at("b").fn == 1);
    CHECK(c.per_class.at("c").tp == 1);
    CHECK(c.per_class.at("c").fp == 1);
    CHECK(c.per_class.at("c").fn == 0);
    CHECK_THROWS_AS(stx::confusion({"a"}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("score applies the zero conventions and sorts rows", "[evaluation]") {
    // class "b" is never predicted (P undefined → 0); class "x" is predicted
    // but never true (support 0, R undefined → 0)
    std::vector<std::string> truth = {"a", "b", "b"};
    std::vector<std::string> pred = {"a", "x", "a"};
    MetricsReport r = stx::score(pred, truth);

    std::vector<std::string> cats;
    for (const auto& row : r.rows) cats.push_back(row.category);
    CHECK(std::is_sorted(cats.begin(), cats.end()));

    const stx::ClassMetrics* b = row_of(r, "b");
    REQUIRE(b != nullptr);
    CHECK(b->precision == 0.0);
    CHECK(b->recall == 0.0);
    CHECK(b->f1 == 0.0);
    CHECK(b->support == 2);

    const stx::ClassMetrics* x = row_of(r, "x");
    REQUIRE(x != nullptr);
    CHECK(x->support == 0);
    CHECK(x->recall == 0.0);

    const stx::ClassMetrics* a = row_of(r, "a");
    REQUIRE(a != nullptr);
    CHECK(a->precision == 0.5);
    CHECK(a->recall == 1.0);

    CHECK(r.total == 3);
    CHECK_THROWS_AS(stx::score({}, {}), std::invalid_argument);
}

TEST_CASE("macro averages skip zero-support rows", "[evaluation]") {
    std::vector<std::string> truth = {"a", "b"};
    std::vector<std::string> pred = {"a", "x"};
    MetricsReport r = stx::score(pred, truth);
    // macro over {a: P1 R1, b: P0 R0} — the support-0 "x" row is excluded
    CHECK(r.macro.precision == 0.5);
    CHECK(r.macro.recall == 0.5);
    CHECK(r.macro.f1 == 0.5);
}

TEST_CASE("micro precision, recall and F1 coincide on single-label data", "[evaluation]") {
    stx::Rng rng(1414);
    for (int round = 0; round < 100; ++round) {
        std::size_t n = 1 + rng.bounded(60);
        std::size_t k = 1 + rng.bounded(6);
        std::vector<std::string> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = "c" + std::to_string(rng.bounded(k));
            pred[i] = "c" + std::to_string(rng.bounded(k + 1));  // may predict a ghost class
        }
        MetricsReport r = stx::score(pred, truth);
        // every prediction is exactly one fp-or-tp, every truth one fn-or-tp,
        // so pooled P and R are the same division; F1 re-derives the same
        // value through 2PR/(P+R) and may land one ulp away
        CHECK(r.micro.precision == r.micro.recall);
        CHECK_THAT(r.micro.f1, Catch::Matchers::WithinULP(r.micro.recall, 2));
    }
}

TEST_CASE("macro-F1 differs from the F1 of macro-averages", "[evaluation]") {
    // two classes with mirrored (P, R): per-class F1s are both 2/3, but
    // F1(macro-P, macro-R) = F1(0.75, 0.75) = 0.75
    // a gets P=1, R=0.5 (two misses, no false alarms); b gets P=0.5, R=1
    std::vector<std::string> truth = {"a", "a", "a", "a", "b", "b"};
    std::vector<std::string> pred = {"a", "a", "b", "b", "b", "b"};
    MetricsReport r = stx::score(pred, truth);

    const stx::ClassMetrics* a = row_of(r, "a");
    const stx::ClassMetrics* b = row_of(r, "b");
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(a->precision == 1.0);
    CHECK(a->recall == 0.5);
    CHECK(b->precision == 0.5);
    CHECK(b->recall == 1.0);

    double macro_f1 = r.macro.f1;                      // mean of the per-class F1s
    double p = r.macro.precision, q = r.macro.recall;  // 0.75, 0.75
    double f1_of_means = 2.0 * p * q / (p + q);
    CHECK(macro_f1 == 2.0 / 3.0);
    CHECK(f1_of_means == 0.75);
    CHECK(macro_f1 != f1_of_means);
}

TEST_CASE("pooled_recall weights recalls by support", "[evaluation]") {
    std::vector<stx::ClassMetrics> rows(2);
    rows[0].category = "big";
    rows[0].recall = 1.0;
    rows[0].support = 9;
    rows[1].category = "small";
    rows[1].recall = 0.0;
    rows[1].support = 1;
    CHECK(stx::pooled_recall(rows) == 0.9);
    CHECK(stx::pooled_recall({}) == 0.0);
}

TEST_CASE("stratified_kfold partitions with per-class balance", "[evaluation][oracle]") {
    stx::Rng rng(77);
    for (int round = 0; round < 200; ++round) {
        std::size_t k = 5;
        std::size_t n_classes = 1 + rng.bounded(5);
        std::size_t n = n_classes * k + rng.bounded(100);
        std::vector<std::string> labels =
            oracle::random_labels(rng, n, n_classes, /*min_per_class=*/k);

        std::uint64_t seed = stx::derive_seed(900, round);
        auto folds = stx::stratified_kfold(labels, k, seed);
        REQUIRE(folds.size() == k);

        // disjoint and covering
        std::vector<std::size_t> seen(n, 0);
        for (const auto& fold : folds) {
            CHECK(std::is_sorted(fold.begin(), fold.end()));
            for (std::size_t i : fold) {
                REQUIRE(i < n);
                ++seen[i];
            }
        }
        for (std::size_t i = 0; i < n; ++i) REQUIRE(seen[i] == 1);

        // per-class fold counts differ by at most one
        std::map<std::string, std::vector<std::size_t>> counts;
        for (std::size_t f = 0; f < k; ++f) {
            std::map<std::string, std::size_t> c;
            for (std::size_t i : folds[f]) ++c[labels[i]];
            for (const auto& [cls, cnt] : c) {
                counts[cls].resize(k, 0);
                counts[cls][f] = cnt;
            }
        }
        for (const auto& [cls, per_fold] : counts) {
            auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
            INFO("round " << round << " class " << cls);
            REQUIRE(*hi - *lo <= 1);
        }

        // deterministic
        CHECK(stx::stratified_kfold(labels, k, seed) == folds);
    }
}

TEST_CASE("stratified_kfold rejects classes smaller than k", "[evaluation]") {
    std::vector<std::string> labels = {"a", "a", "a", "a", "a", "b", "b", "b", "b"};
    // b has 4 members: 4 < 5 throws, 4-fold is fine
    CHECK_THROWS_AS(stx::stratified_kfold(labels, 5, 1), stx::StratificationError);
    CHECK_NOTHROW(stx::stratified_kfold(labels, 4, 1));
    CHECK_THROWS_AS(stx::stratified_kfold(labels, 0, 1), std::invalid_argument);

    // k = 1 puts everything in the single fold
    auto folds = stx::stratified_kfold(labels, 1, 1);
    REQUIRE(folds.size() == 1);
    CHECK(folds[0].size() == labels.size());
}

TEST_CASE("mean_report averages metrics and sums supports", "[evaluation]") {
    MetricsReport f1 = stx::score({"a", "b"}, {"a", "a"});   // a: P1 R0.5; b ghost
    MetricsReport f2 = stx::score({"a", "a"}, {"a", "a"});   // a: P1 R1

    MetricsReport mean = stx::mean_report({f1, f2});
    const stx::ClassMetrics* a = row_of(mean, "a");
    REQUIRE(a != nullptr);
    CHECK(a->precision == 1.0);
    CHECK(a->recall == 0.75);   // (0.5 + 1)/2
    CHECK(a->support == 4);     // summed across folds
    CHECK(mean.total == 4);
    CHECK(mean.macro.recall == (f1.macro.recall + f2.macro.recall) / 2.0);
    CHECK(mean.micro.f1 == (f1.micro.f1 + f2.micro.f1) / 2.0);
}

TEST_CASE("category_size_curve sorts by support", "[evaluation]") {
    MetricsReport r = stx::score({"a", "b", "b", "b"}, {"a", "b", "b", "c"});
    auto curve = stx::category_size_curve(r);
    REQUIRE(curve.size() == 3);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i - 1].first <= curve[i].first);
    }
}

TEST_CASE("reports round-trip through json", "[evaluation]") {
    MetricsReport r = stx::score({"a", "b", "a"}, {"a", "b", "b"});
    r.config = stx::json{{"k", 5}};
    stx::json j = stx::report_to_json(r);
    MetricsReport back = stx::report_from_json(j);

    REQUIRE(back.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(back.rows[i].category == r.rows[i].category);
        CHECK(back.rows[i].precision == r.rows[i].precision);
        CHECK(back.rows[i].recall == r.rows[i].recall);
        CHECK(back.rows[i].f1 == r.rows[i].f1);
        CHECK(back.rows[i].support == r.rows[i].support);
    }
    CHECK(back.macro.f1 == r.macro.f1);
    CHECK(back.micro.f1 == r.micro.f1);
    CHECK(back.total == r.total);
    CHECK(back.config == r.config);
}

TEST_CASE("csv report carries the fixed header and summary rows", "[evaluation]") {
    MetricsReport r = stx::score({"a", "b,c", "a"}, {"a", "b,c", "b,c"});
    std::string csv = stx::report_to_csv(r, "aabbccdd00112233");

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t nl = csv.find('\n', pos);
        if (nl == std::string::npos) nl = csv.size();
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }

    REQUIRE(lines.size() >= 5);
    CHECK(lines[0] == "# manifest: aabbccdd00112233");
    CHECK(lines[1] == "category,precision,recall,f1,support");
    // the comma-bearing category is quoted
    CHECK(lines[3].rfind("\"b,c\"", 0) == 0);
    CHECK(lines[4].rfind("Category Average,", 0) == 0);
    CHECK(lines[5].rfind("Absolute Average,", 0) == 0);
    // four-decimal fixed formatting
    CHECK(lines[2].find("1.0000") != std::string::npos);

    // no manifest line when the hash is empty
    std::string bare = stx::report_to_csv(r, "");
    CHECK(bare.rfind("category,precision,recall,f1,support", 0) == 0);
}
