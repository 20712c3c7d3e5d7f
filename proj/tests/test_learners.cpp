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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "stx/errors.hpp"
#include "stx/evaluation.hpp"
#include "stx/jsonl.hpp"
#include "stx/learners.hpp"

#include "oracles.hpp"

namespace fs = std::filesystem;
using stx::LearnerConfig;
using stx::LearnerKind;
using stx::SparseMatrix;

namespace {

// the separable 2-D toy: positives on the right, negatives on the left
SparseMatrix separable_points() {
    std::vector<std::vector<double>> pts = {
        {2.0, 1.0},  {2.0, -1.0},  {3.0, 1.0},  {3.0, -1.0},
        {-2.0, 1.0}, {-2.0, -1.0}, {-3.0, 1.0}, {-3.0, -1.0},
    };
    return oracle::to_sparse(pts, 2);
}

const std::vector<std::string> separable_labels = {"pos", "pos", "pos", "pos",
                                                   "neg", "neg", "neg", "neg"};

// 90/10 imbalance where the minority's only feature is shared with a
// slice of the majority, so unweighted training writes the minority off
void imbalance_toy(SparseMatrix& X, std::vector<std::string>& y) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({1.0, 0.0});
        y.push_back("min");
    }
    for (int i = 0; i < 30; ++i) {
        rows.push_back({1.0, 0.0});
        y.push_back("maj");
    }
    for (int i = 0; i < 60; ++i) {
        rows.push_back({0.0, 1.0});
        y.push_back("maj");
    }
    X = oracle::to_sparse(rows, 2);
}

double recall_of(const stx::MetricsReport& r, const std::string& cls) {
    for (const auto& row : r.rows) {
        if (row.category == cls) return row.recall;
    }
    return -1.0;
}

}  // namespace

TEST_CASE("train_nb reproduces the closed-form smoothed likelihood", "[learners]") {
    // class A sees feature a twice and never feature b; V = 2, α = 1
    // → P(a|A) = (2+1)/(2+2) = 0.75 exactly
    std::vector<std::vector<double>> rows = {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    SparseMatrix X = oracle::to_sparse(rows, 2);
    std::vector<std::string> y = {"A", "A", "B"};

    stx::TrainedModel m = stx::train_nb(X, y, 1.0);
    REQUIRE(m.classes == std::vector<std::string>{"A", "B"});
    CHECK(m.weights[0][0] == std::log(3.0 / 4.0));
    CHECK(m.weights[0][1] == std::log(1.0 / 4.0));
    CHECK(m.weights[1][0] == std::log(1.0 / 3.0));
    CHECK(m.weights[1][1] == std::log(2.0 / 3.0));
    // log-priors: 2/3 and 1/3
    CHECK(m.bias[0] == std::log(2.0 / 3.0));
    CHECK(m.bias[1] == std::log(1.0 / 3.0));
    CHECK(m.kind == LearnerKind::nb);
}

TEST_CASE("train_nb with alpha 0 marks unseen features, never NaN", "[learners]") {
    std::vector<std::vector<double>> rows = {{2.0, 0.0}, {0.0, 3.0}};
    SparseMatrix X = oracle::to_sparse(rows, 2);
    std::vector<std::string> y = {"A", "B"};

    stx::TrainedModel m = stx::train_nb(X, y, 0.0);
    CHECK(m.weights[0][0] == std::log(1.0));  // 2/2
    CHECK(m.weights[0][1] == stx::kLogZero);
    CHECK(m.weights[1][0] == stx::kLogZero);
    for (const auto& wc : m.weights) {
        for (double v : wc) CHECK(std::isfinite(v));
    }
}

TEST_CASE("train_nb at alpha 0 is invariant to feature scaling", "[learners]") {
    stx::Rng rng(555);
    std::vector<std::vector<double>> rows = oracle::random_dense(rng, 12, 6, 0.5);
    // counts must be non-negative
    for (auto& r : rows) {
        for (double& v : r) v = std::fabs(v);
    }
    std::vector<std::string> y = oracle::random_labels(rng, 12, 3);

    SparseMatrix X1 = oracle::to_sparse(rows, 6);
    for (auto& r : rows) {
        for (double& v : r) v *= 2.0;  // power of two keeps the quotient bit-exact
    }
    SparseMatrix X2 = oracle::to_sparse(rows, 6);

    stx::TrainedModel m1 = stx::train_nb(X1, y, 0.0);
    stx::TrainedModel m2 = stx::train_nb(X2, y, 0.0);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    // the invariant is the parameters: scaling a *query* re-balances the
    // likelihood term against the fixed prior, so argmaxes may move
    CHECK(stx::predict(m2, X1) == stx::predict(m1, X1));
}

TEST_CASE("train_nb validates its inputs", "[learners]") {
    std::vector<std::vector<double>> rows = {{1.0}, {1.0}};
    SparseMatrix X = oracle::to_sparse(rows, 1);
    CHECK_THROWS_AS(stx::train_nb(X, {"A"}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(stx::train_nb(X, {"A", "A"}, 1.0), stx::DegenerateLabelsError);
    CHECK_THROWS_AS(stx::train_nb(X, {"A", "B"}, -0.5), std::invalid_argument);
}

TEST_CASE("logistic gradient matches central finite differences", "[learners][oracle]") {
    stx::Rng rng(321);
    int tested = 0;
    while (tested < 20) {
        std::size_t n = 2 + rng.bounded(7);
        std::size_t d = 1 + rng.bounded(5);
        std::vector<std::vector<double>> rows = oracle::random_dense(rng, n, d, 0.7);
        SparseMatrix X = oracle::to_sparse(rows, d);
        std::vector<int> y_pm(n);
        std::vector<double> sw(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_pm[i] = rng.bounded(2) == 0 ? -1 : 1;
            sw[i] = 0.5 + rng.uniform() * 2.0;
        }
        std::vector<double> w(d);
        for (double& wj : w) wj = (rng.uniform() - 0.5) * 2.0;
        double b = (rng.uniform() - 0.5) * 2.0;
        double C = 0.5 + rng.uniform() * 4.0;

        auto [gw, gb] = stx::linear_gradient(X, y_pm, sw, LearnerKind::logreg, C, w, b);

        const double h = 1e-6;
        auto obj_at = [&](const std::vector<double>& wv, double bv) {
            return stx::linear_objective(X, y_pm, sw, LearnerKind::logreg, C, wv, bv);
        };
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double fd = (obj_at(wp, b) - obj_at(wm, b)) / (2.0 * h);
            INFO("point " << tested << " coord " << j);
            REQUIRE(oracle::close_rel(gw[j], fd, 1e-4));
        }
        double fdb = (obj_at(w, b + h) - obj_at(w, b - h)) / (2.0 * h);
        REQUIRE(oracle::close_rel(gb, fdb, 1e-4));
        ++tested;
    }
}

TEST_CASE("hinge subgradient matches finite differences away from the kink", "[learners][oracle]") {
    stx::Rng rng(654);
    int tested = 0;
    while (tested < 20) {
        std::size_t n = 2 + rng.bounded(7);
        std::size_t d = 1 + rng.bounded(5);
        std::vector<std::vector<double>> rows = oracle::random_dense(rng, n, d, 0.7);
        SparseMatrix X = oracle::to_sparse(rows, d);
        std::vector<int> y_pm(n);
        std::vector<double> sw(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_pm[i] = rng.bounded(2) == 0 ? -1 : 1;
            sw[i] = 0.5 + rng.uniform() * 2.0;
        }
        std::vector<double> w(d);
        for (double& wj : w) wj = (rng.uniform() - 0.5) * 2.0;
        double b = (rng.uniform() - 0.5) * 2.0;
        double C = 0.5 + rng.uniform() * 4.0;

        // every margin must sit clear of m = 1 for the difference to be valid
        bool near_kink = false;
        for (std::size_t i = 0; i < n; ++i) {
            double m = static_cast<double>(y_pm[i]) * (X.dot_row(i, w) + b);
            if (std::fabs(1.0 - m) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;

        auto [gw, gb] = stx::linear_gradient(X, y_pm, sw, LearnerKind::svm, C, w, b);
        const double h = 1e-7;
        auto obj_at = [&](const std::vector<double>& wv, double bv) {
            return stx::linear_objective(X, y_pm, sw, LearnerKind::svm, C, wv, bv);
        };
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double fd = (obj_at(wp, b) - obj_at(wm, b)) / (2.0 * h);
            INFO("point " << tested << " coord " << j);
            REQUIRE(oracle::close_rel(gw[j], fd, 1e-4));
        }
        double fdb = (obj_at(w, b + h) - obj_at(w, b - h)) / (2.0 * h);
        REQUIRE(oracle::close_rel(gb, fdb, 1e-4));
        ++tested;
    }
}

TEST_CASE("both linear learners separate the 8-point toy perfectly", "[learners]") {
    SparseMatrix X = separable_points();
    LearnerConfig config;
    config.C = 10.0;
    config.epochs = 50;
    config.seed = 42;

    for (LearnerKind kind : {LearnerKind::svm, LearnerKind::logreg}) {
        stx::TrainedModel m = stx::train_linear(X, separable_labels, kind, config);
        CHECK(stx::predict(m, X) == separable_labels);
    }
}

TEST_CASE("SGD drives the binary objective down over epochs", "[learners]") {
    SparseMatrix X = separable_points();
    std::vector<int> y_pm = {1, 1, 1, 1, -1, -1, -1, -1};
    std::vector<double> sw(8, 1.0);

    auto obj_after = [&](std::size_t epochs) {
        auto [w, b] =
            stx::fit_binary_linear(X, y_pm, sw, LearnerKind::svm, 1.0, epochs, 7, "pos");
        return stx::linear_objective(X, y_pm, sw, LearnerKind::svm, 1.0, w, b);
    };

    double at_start = stx::linear_objective(X, y_pm, sw, LearnerKind::svm, 1.0,
                                            std::vector<double>(2, 0.0), 0.0);
    double e1 = obj_after(1);
    double e20 = obj_after(20);
    CHECK(e1 < at_start);
    CHECK(e20 < e1);
}

TEST_CASE("weighting the minority class strictly raises its recall", "[learners]") {
    SparseMatrix X;
    std::vector<std::string> y;
    imbalance_toy(X, y);

    LearnerConfig plain;
    plain.C = 1.0;
    plain.epochs = 30;
    plain.seed = 3;

    LearnerConfig boosted = plain;
    boosted.class_weights["min"] = 10.0;

    stx::TrainedModel m1 = stx::train_linear(X, y, LearnerKind::svm, plain);
    stx::TrainedModel m2 = stx::train_linear(X, y, LearnerKind::svm, boosted);

    double r1 = recall_of(stx::score(stx::predict(m1, X), y), "min");
    double r2 = recall_of(stx::score(stx::predict(m2, X), y), "min");
    REQUIRE(r1 >= 0.0);
    CHECK(r2 > r1);
}

TEST_CASE("train_linear is bitwise deterministic per seed", "[learners]") {
    SparseMatrix X = separable_points();
    LearnerConfig config;
    config.C = 2.0;
    config.epochs = 10;
    config.seed = 99;

    stx::TrainedModel a = stx::train_linear(X, separable_labels, LearnerKind::svm, config);
    stx::TrainedModel b = stx::train_linear(X, separable_labels, LearnerKind::svm, config);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);

    config.seed = 100;
    stx::TrainedModel c = stx::train_linear(X, separable_labels, LearnerKind::svm, config);
    CHECK(a.weights != c.weights);
}

TEST_CASE("train_linear validates config and labels", "[learners]") {
    SparseMatrix X = separable_points();
    LearnerConfig config;

    CHECK_THROWS_AS(stx::train_linear(X, separable_labels, LearnerKind::nb, config),
                    std::invalid_argument);

    LearnerConfig bad_c = config;
    bad_c.C = 0.0;
    CHECK_THROWS_AS(stx::train_linear(X, separable_labels, LearnerKind::svm, bad_c),
                    std::invalid_argument);

    LearnerConfig bad_epochs = config;
    bad_epochs.epochs = 0;
    CHECK_THROWS_AS(stx::train_linear(X, separable_labels, LearnerKind::svm, bad_epochs),
                    std::invalid_argument);

    LearnerConfig bad_weight = config;
    bad_weight.class_weights["pos"] = -1.0;
    CHECK_THROWS_AS(stx::train_linear(X, separable_labels, LearnerKind::svm, bad_weight),
                    std::invalid_argument);

    std::vector<std::string> one_class(8, "same");
    CHECK_THROWS_AS(stx::train_linear(X, one_class, LearnerKind::svm, config),
                    stx::DegenerateLabelsError);
}

TEST_CASE("predict breaks exact ties toward the first sorted class", "[learners]") {
    stx::TrainedModel m;
    m.kind = LearnerKind::svm;
    m.classes = {"alpha", "beta"};
    m.weights = {{0.0}, {0.0}};
    m.bias = {0.0, 0.0};

    std::vector<std::vector<double>> rows = {{1.0}};
    SparseMatrix X = oracle::to_sparse(rows, 1);
    CHECK(stx::predict(m, X) == std::vector<std::string>{"alpha"});
}

TEST_CASE("decision_scores refuses mismatched feature width", "[learners]") {
    stx::TrainedModel m;
    m.kind = LearnerKind::svm;
    m.classes = {"a", "b"};
    m.weights = {{0.1, 0.2}, {0.3, 0.4}};
    m.bias = {0.0, 0.0};

    std::vector<std::vector<double>> rows = {{1.0}};
    SparseMatrix X = oracle::to_sparse(rows, 1);
    CHECK_THROWS_AS(stx::decision_scores(m, X), std::invalid_argument);
}

TEST_CASE("select_rows keeps the chosen rows in order", "[learners]") {
    std::vector<std::vector<double>> rows = {{1.0, 0.0}, {0.0, 2.0}, {3.0, 0.0}};
    SparseMatrix m = oracle::to_sparse(rows, 2);
    SparseMatrix s = stx::select_rows(m, {2, 0});
    REQUIRE(s.rows == 2);
    CHECK(s.cols == 2);
    CHECK(oracle::row_entries(s, 0) ==
          std::vector<std::pair<std::uint32_t, double>>{{0, 3.0}});
    CHECK(oracle::row_entries(s, 1) ==
          std::vector<std::pair<std::uint32_t, double>>{{0, 1.0}});
}

TEST_CASE("grid_search_C dedupes candidates and prefers the smaller C on ties", "[learners]") {
    // trivially separable: every candidate scores a mean macro-F1 of 1
    std::vector<std::vector<double>> rows;
    std::vector<std::string> y;
    for (int i = 0; i < 8; ++i) {
        bool pos = i % 2 == 0;
        rows.push_back({pos ? 1.0 : 0.0, pos ? 0.0 : 1.0});
        y.push_back(pos ? "p" : "n");
    }
    SparseMatrix X = oracle::to_sparse(rows, 2);

    stx::GridSearchResult r = stx::grid_search_C(X, y, {5.0, 1.0, 5.0, 1.0}, 2, 42);
    CHECK(r.candidates == std::vector<double>{5.0, 1.0});  // deduped, input order
    REQUIRE(r.mean_scores.size() == 2);
    CHECK(r.mean_scores[0] == 1.0);
    CHECK(r.mean_scores[1] == 1.0);
    CHECK(r.chosen == 1.0);  // tie resolved toward the smaller C

    CHECK_THROWS_AS(stx::grid_search_C(X, y, {}, 2, 42), std::invalid_argument);
    CHECK_THROWS_AS(stx::grid_search_C(X, y, {1.0}, 1, 42), std::invalid_argument);
}

TEST_CASE("models round-trip through save and load byte-stably", "[learners]") {
    SparseMatrix X = separable_points();
    LearnerConfig config;
    config.C = 2.5;
    config.epochs = 12;
    config.seed = 5;
    config.class_weights["pos"] = 1.5;

    stx::TrainedModel m = stx::train_linear(X, separable_labels, LearnerKind::logreg, config);
    m.feature_columns = {0, 1};
    m.vocab_fingerprint = 0xabcdef0123456789ull;

    fs::path dir = oracle::make_temp_dir("model");
    stx::save_model(dir / "m.json", m, "1122334455667788");
    stx::TrainedModel back = stx::load_model(dir / "m.json");

    CHECK(back.kind == m.kind);
    CHECK(back.classes == m.classes);
    CHECK(back.weights == m.weights);  // bit-exact
    CHECK(back.bias == m.bias);
    CHECK(back.feature_columns == m.feature_columns);
    CHECK(back.vocab_fingerprint == m.vocab_fingerprint);
    CHECK(back.config.C == m.config.C);
    CHECK(back.config.epochs == m.config.epochs);
    CHECK(back.config.class_weights == m.config.class_weights);

    // re-serialization is byte-identical
    CHECK(stx::model_to_json(back).dump(2) == stx::model_to_json(m).dump(2));

    stx::json j = stx::json::parse(stx::read_file(dir / "m.json"));
    j["magic"] = "WRONG";
    stx::atomic_write(dir / "bad.json", j.dump());
    CHECK_THROWS_AS(stx::load_model(dir / "bad.json"), stx::FormatError);
    fs::remove_all(dir);
}
