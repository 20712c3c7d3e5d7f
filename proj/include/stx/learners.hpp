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

// The three classifiers: multinomial naive Bayes, and one-vs-rest logistic
// regression / linear SVM trained by a hand-rolled stochastic subgradient
// descent. Every per-class subproblem is independent and carries its own
// derived seed, so training order (or parallelism) cannot change a model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stx/errors.hpp"
#include "stx/evaluation.hpp"
#include "stx/features.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"
#include "stx/sparse.hpp"

namespace stx {

enum class LearnerKind { nb, logreg, svm };

inline const char* to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::nb: return "nb";
        case LearnerKind::logreg: return "logreg";
        default: return "svm";
    }
}

inline LearnerKind learner_from_string(const std::string& s) {
    if (s == "nb") return LearnerKind::nb;
    if (s == "logreg") return LearnerKind::logreg;
    if (s == "svm") return LearnerKind::svm;
    throw std::invalid_argument("unknown learner: " + s);
}

/// Stand-in for log(0) in NB likelihoods with alpha=0: large enough that a
/// single zero-probability feature vetoes a class, small enough to stay
/// finite under summation.
constexpr double kLogZero = -1e30;

struct LearnerConfig {
    double C = 1.0;
    std::map<std::string, double> class_weights;  // empty = every class weighs 1
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    double alpha = 1.0;            // NB smoothing
    std::string schedule = "inv_t";  // step size 1/(λ(t+t0))
};

struct TrainedModel {
    LearnerKind kind = LearnerKind::svm;
    std::vector<std::string> classes;          // sorted lexicographically
    std::vector<std::vector<double>> weights;  // per class, dense over model columns
    std::vector<double> bias;                  // per class
    LearnerConfig config;
    std::vector<std::uint32_t> feature_columns;  // selected columns in vocabulary space
    std::uint64_t vocab_fingerprint = 0;
};

namespace detail {

inline std::vector<std::string> sorted_classes(const std::vector<std::string>& y) {
    std::set<std::string> s(y.begin(), y.end());
    return std::vector<std::string>(s.begin(), s.end());
}

inline double class_weight_of(const LearnerConfig& config, const std::string& cls) {
    auto it = config.class_weights.find(cls);
    return it == config.class_weights.end() ? 1.0 : it->second;
}

// σ(−m) without overflow for any m
inline double sigmoid_neg(double m) {
    if (m >= 0.0) {
        double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

// log(1 + e^{−m}) without overflow
inline double softplus_neg(double m) {
    if (m >= 0.0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

}  // namespace detail

/// Multinomial naive Bayes on summed per-class feature values. Weights hold
/// the per-feature log-likelihoods log((count_cj + α)/(Σ_j count_cj + αV)),
/// bias the log-priors, so prediction is the same argmax-of-linear-score as
/// the other learners. With α = 0 a zero count maps to kLogZero, never NaN.
inline TrainedModel train_nb(const SparseMatrix& X, const std::vector<std::string>& y,
                             double alpha = 1.0) {
    if (X.rows != y.size()) throw std::invalid_argument("train_nb: rows/labels mismatch");
    if (alpha < 0.0) throw std::invalid_argument("train_nb: alpha must be >= 0");
    TrainedModel model;
    model.kind = LearnerKind::nb;
    model.classes = detail::sorted_classes(y);
    if (model.classes.size() < 2) throw DegenerateLabelsError("train_nb needs at least 2 classes");
    model.config.alpha = alpha;

    std::map<std::string, std::size_t> class_index;
    for (std::size_t c = 0; c < model.classes.size(); ++c) class_index[model.classes[c]] = c;

    const std::size_t k = model.classes.size();
    const std::size_t V = X.cols;
    std::vector<std::vector<double>> counts(k, std::vector<double>(V, 0.0));
    std::vector<double> class_n(k, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        std::size_t c = class_index.at(y[i]);
        class_n[c] += 1.0;
        for (std::size_t p = X.row_begin(i); p < X.row_end(i); ++p) {
            counts[c][X.indices[p]] += X.values[p];
        }
    }

    model.weights.assign(k, std::vector<double>(V, 0.0));
    model.bias.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double total = 0.0;
        for (double v : counts[c]) total += v;
        double denom = total + alpha * static_cast<double>(V);
        for (std::size_t j = 0; j < V; ++j) {
            double num = counts[c][j] + alpha;
            model.weights[c][j] = num > 0.0 && denom > 0.0 ? std::log(num / denom) : kLogZero;
        }
        model.bias[c] = std::log(class_n[c] / static_cast<double>(X.rows));
    }
    return model;
}

/// Full-batch value of the regularized objective for one binary problem:
///   (1/2)‖w‖² + C·Σ_i cw_i · loss(y_i, w·x_i + b)
/// with hinge loss for svm and log loss for logreg. Exists so gradients can
/// be checked against finite differences.
inline double linear_objective(const SparseMatrix& X, const std::vector<int>& y_pm,
                               const std::vector<double>& sample_weights, LearnerKind kind,
                               double C, const std::vector<double>& w, double b) {
    double obj = 0.0;
    for (double wj : w) obj += 0.5 * wj * wj;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double m = static_cast<double>(y_pm[i]) * (X.dot_row(i, w) + b);
        double loss = kind == LearnerKind::svm ? std::max(0.0, 1.0 - m) : detail::softplus_neg(m);
        obj += C * sample_weights[i] * loss;
    }
    return obj;
}

/// Full-batch (sub)gradient of linear_objective in (w, b). At the hinge
/// kink the zero branch is chosen.
inline std::pair<std::vector<double>, double> linear_gradient(
    const SparseMatrix& X, const std::vector<int>& y_pm, const std::vector<double>& sample_weights,
    LearnerKind kind, double C, const std::vector<double>& w, double b) {
    std::vector<double> gw = w;  // regularizer part
    double gb = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double yi = static_cast<double>(y_pm[i]);
        double m = yi * (X.dot_row(i, w) + b);
        double dloss;  // d loss / d score
        if (kind == LearnerKind::svm) {
            dloss = m < 1.0 ? -yi : 0.0;
        } else {
            dloss = -yi * detail::sigmoid_neg(m);
        }
        if (dloss != 0.0) {
            double g = C * sample_weights[i] * dloss;
            for (std::size_t p = X.row_begin(i); p < X.row_end(i); ++p) {
                gw[X.indices[p]] += g * X.values[p];
            }
            gb += g;
        }
    }
    return {std::move(gw), gb};
}

/// Solve one one-vs-rest binary subproblem by epoch-wise SGD with the
/// 1/(λ(t+t0)) step schedule, λ = 1/(C·n) and t0 = 10/λ so the first step
/// is 0.1. The bias stays unregularized. Shuffling draws only from `seed`,
/// making the run reproducible bit for bit.
inline std::pair<std::vector<double>, double> fit_binary_linear(
    const SparseMatrix& X, const std::vector<int>& y_pm, const std::vector<double>& sample_weights,
    LearnerKind kind, double C, std::size_t epochs, std::uint64_t seed,
    const std::string& class_id) {
    const std::size_t n = X.rows;
    const double lambda = 1.0 / (C * static_cast<double>(n));
    const double t0 = 10.0 / lambda;

    std::vector<double> w(X.cols, 0.0);
    double b = 0.0;
    double t = 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t i : order) {
            const double eta = 1.0 / (lambda * (t + t0));
            t += 1.0;
            const double yi = static_cast<double>(y_pm[i]);
            const double m = yi * (X.dot_row(i, w) + b);
            double pull = 0.0;  // coefficient on η·cw·y·x_i
            if (kind == LearnerKind::svm) {
                if (m < 1.0) pull = 1.0;
            } else {
                pull = detail::sigmoid_neg(m);
            }
            const double shrink = 1.0 - eta * lambda;
            for (double& wj : w) wj *= shrink;
            if (pull != 0.0) {
                const double g = eta * sample_weights[i] * yi * pull;
                for (std::size_t p = X.row_begin(i); p < X.row_end(i); ++p) {
                    w[X.indices[p]] += g * X.values[p];
                }
                b += g;
            }
        }
        bool finite = std::isfinite(b);
        for (std::size_t j = 0; finite && j < w.size(); ++j) finite = std::isfinite(w[j]);
        if (!finite) throw DivergedError(class_id, epoch);
    }
    return {std::move(w), b};
}

/// One-vs-rest training for logreg/svm. Per sample the loss is scaled by
/// the class weight of its TRUE class, mirroring the weighted-SVM treatment
/// of imbalance. Each class's subproblem runs under a seed derived from
/// (config.seed, class), so results do not depend on class order.
inline TrainedModel train_linear(const SparseMatrix& X, const std::vector<std::string>& y,
                                 LearnerKind kind, const LearnerConfig& config) {
    if (kind == LearnerKind::nb) {
        throw std::invalid_argument("train_linear handles logreg/svm; use train_nb");
    }
    if (X.rows != y.size()) throw std::invalid_argument("train_linear: rows/labels mismatch");
    if (!(config.C > 0.0)) throw std::invalid_argument("train_linear: C must be positive");
    if (config.epochs < 1) throw std::invalid_argument("train_linear: epochs must be >= 1");
    for (const auto& [cls, wgt] : config.class_weights) {
        if (!(wgt > 0.0)) throw std::invalid_argument("class weight for '" + cls + "' must be positive");
    }

    TrainedModel model;
    model.kind = kind;
    model.classes = detail::sorted_classes(y);
    if (model.classes.size() < 2) {
        throw DegenerateLabelsError("train_linear needs at least 2 classes");
    }
    model.config = config;

    std::vector<double> sample_weights(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        sample_weights[i] = detail::class_weight_of(config, y[i]);
    }

    std::vector<int> y_pm(X.rows);
    for (const std::string& cls : model.classes) {
        for (std::size_t i = 0; i < X.rows; ++i) y_pm[i] = y[i] == cls ? 1 : -1;
        auto [w, b] = fit_binary_linear(X, y_pm, sample_weights, kind, config.C, config.epochs,
                                        derive_seed(config.seed, "ovr", cls), cls);
        model.weights.push_back(std::move(w));
        model.bias.push_back(b);
    }
    return model;
}

/// Per-row decision values w_c·x + b_c, one column per model class.
inline std::vector<std::vector<double>> decision_scores(const TrainedModel& model,
                                                        const SparseMatrix& X) {
    if (!model.weights.empty() && X.cols != model.weights.front().size()) {
        throw std::invalid_argument("decision_scores: matrix columns do not match model");
    }
    std::vector<std::vector<double>> scores(X.rows, std::vector<double>(model.classes.size()));
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t c = 0; c < model.classes.size(); ++c) {
            scores[i][c] = X.dot_row(i, model.weights[c]) + model.bias[c];
        }
    }
    return scores;
}

/// argmax over classes; ties go to the first class in sorted order.
inline std::vector<std::string> predict(const TrainedModel& model, const SparseMatrix& X) {
    auto scores = decision_scores(model, X);
    std::vector<std::string> out;
    out.reserve(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < model.classes.size(); ++c) {
            if (scores[i][c] > scores[i][best]) best = c;
        }
        out.push_back(model.classes[best]);
    }
    return out;
}

/// Rows of m selected by sorted-or-not index list, in the given order.
inline SparseMatrix select_rows(const SparseMatrix& m, const std::vector<std::size_t>& rows) {
    SparseMatrix out;
    out.cols = m.cols;
    std::vector<std::pair<std::uint32_t, double>> row;
    for (std::size_t i : rows) {
        row.clear();
        for (std::size_t p = m.row_begin(i); p < m.row_end(i); ++p) {
            row.emplace_back(m.indices[p], m.values[p]);
        }
        out.append_row(row);
    }
    return out;
}

struct GridSearchResult {
    std::vector<double> candidates;   // deduplicated, input order
    std::vector<double> mean_scores;  // mean CV macro-F1 per candidate
    double chosen = 0.0;
};

/// Stratified k-fold CV macro-F1 for each candidate C; chosen = best mean
/// score, ties resolved toward the smallest C.
inline GridSearchResult grid_search_C(const SparseMatrix& X, const std::vector<std::string>& y,
                                      const std::vector<double>& candidates, std::size_t folds,
                                      std::uint64_t seed, LearnerKind kind = LearnerKind::svm,
                                      const LearnerConfig& base = LearnerConfig{}) {
    if (candidates.empty()) throw std::invalid_argument("grid_search_C: no candidates");
    if (folds < 2) throw std::invalid_argument("grid_search_C: folds must be >= 2");

    GridSearchResult result;
    for (double c : candidates) {
        if (std::find(result.candidates.begin(), result.candidates.end(), c) ==
            result.candidates.end()) {
            result.candidates.push_back(c);
        }
    }

    auto fold_sets = stratified_kfold(y, folds, seed);
    for (double c : result.candidates) {
        double sum = 0.0;
        for (std::size_t f = 0; f < fold_sets.size(); ++f) {
            std::vector<std::size_t> train_idx;
            for (std::size_t g = 0; g < fold_sets.size(); ++g) {
                if (g == f) continue;
                train_idx.insert(train_idx.end(), fold_sets[g].begin(), fold_sets[g].end());
            }
            std::sort(train_idx.begin(), train_idx.end());
            std::vector<std::string> y_train, y_test;
            for (std::size_t i : train_idx) y_train.push_back(y[i]);
            for (std::size_t i : fold_sets[f]) y_test.push_back(y[i]);

            LearnerConfig config = base;
            config.C = c;
            config.seed = derive_seed(seed, "grid", f);
            TrainedModel model = train_linear(select_rows(X, train_idx), y_train, kind, config);
            auto report = score(predict(model, select_rows(X, fold_sets[f])), y_test);
            sum += report.macro.f1;
        }
        result.mean_scores.push_back(sum / static_cast<double>(fold_sets.size()));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        bool better = result.mean_scores[i] > result.mean_scores[best];
        bool tied_smaller = result.mean_scores[i] == result.mean_scores[best] &&
                            result.candidates[i] < result.candidates[best];
        if (better || tied_smaller) best = i;
    }
    result.chosen = result.candidates[best];
    return result;
}

// ---------------------------------------------------------------------------
// serialization ("STXM1")

inline json model_to_json(const TrainedModel& model) {
    json cw = json::object();
    for (const auto& [cls, wgt] : model.config.class_weights) cw[cls] = wgt;
    return json{{"magic", "STXM1"},
                {"kind", to_string(model.kind)},
                {"classes", model.classes},
                {"weights", model.weights},
                {"bias", model.bias},
                {"config",
                 {{"C", model.config.C},
                  {"class_weights", cw},
                  {"epochs", model.config.epochs},
                  {"seed", model.config.seed},
                  {"alpha", model.config.alpha},
                  {"schedule", model.config.schedule}}},
                {"feature_columns", model.feature_columns},
                {"vocab_fingerprint", hex64(model.vocab_fingerprint)}};
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& model,
                       const std::string& manifest_hash) {
    json j = model_to_json(model);
    if (!manifest_hash.empty()) j["manifest_hash"] = manifest_hash;
    atomic_write(path, j.dump(2) + "\n");
}

inline TrainedModel load_model(const std::filesystem::path& path) {
    json j = parse_lenient(read_file(path));
    if (j.is_discarded() || !j.is_object() || j.value("magic", "") != "STXM1") {
        throw FormatError("not a model file (missing STXM1 magic): " + path.string());
    }
    TrainedModel model;
    model.kind = learner_from_string(j.at("kind").get<std::string>());
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    model.bias = j.at("bias").get<std::vector<double>>();
    const json& cfg = j.at("config");
    model.config.C = cfg.at("C").get<double>();
    for (auto it = cfg.at("class_weights").begin(); it != cfg.at("class_weights").end(); ++it) {
        model.config.class_weights[it.key()] = it.value().get<double>();
    }
    model.config.epochs = cfg.at("epochs").get<std::size_t>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.alpha = cfg.at("alpha").get<double>();
    model.config.schedule = cfg.at("schedule").get<std::string>();
    model.feature_columns = j.at("feature_columns").get<std::vector<std::uint32_t>>();
    model.vocab_fingerprint = std::stoull(j.at("vocab_fingerprint").get<std::string>(), nullptr, 16);
    return model;
}

}  // namespace stx
