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

// The assembled pipeline: expansion → vocabulary → TF-IDF → feature
// selection → learner, plus stratified cross-validation around it. Fitting
// sees the training split and nothing else; every statistic a fold's test
// documents could influence is refit inside that fold.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stx/corpus.hpp"
#include "stx/errors.hpp"
#include "stx/evaluation.hpp"
#include "stx/expansion.hpp"
#include "stx/features.hpp"
#include "stx/learners.hpp"
#include "stx/rng.hpp"
#include "stx/textprep.hpp"

namespace stx {

struct ExpansionSettings {
    bool enabled = false;
    ExpansionSide side = ExpansionSide::document;
    std::size_t n = 0;
    std::optional<Thesaurus> hashtag;  // prebuilt from an auxiliary stream
    bool category = false;             // built from the training split at fit time
    ThesaurusWeighting category_weighting = ThesaurusWeighting::tfidf;
    std::size_t category_max_depth = 50;
};

struct PipelineConfig {
    int ngram_max = 1;
    std::uint32_t min_df = 1;
    double keep_fraction = 1.0;
    LearnerKind learner = LearnerKind::svm;
    LearnerConfig learner_config;  // seed field is overridden per fit
    bool nb_counts = false;        // NB on raw counts instead of TF-IDF
    ExpansionSettings expansion;
    StopLists stops;  // consulted when building category thesauri
};

struct FittedPipeline {
    Vocabulary vocab;
    FeatureMask mask;
    TrainedModel model;
    std::optional<Thesaurus> category_thesaurus;
};

namespace detail {

inline SparseMatrix vectorize(const std::vector<Document>& docs, const Vocabulary& vocab,
                              const PipelineConfig& config) {
    bool counts = config.learner == LearnerKind::nb && config.nb_counts;
    return counts ? term_counts(docs, vocab) : tfidf(docs, vocab);
}

}  // namespace detail

/// Fit everything on the training corpus. Expansion (when enabled and the
/// side covers documents) runs first — hashtag thesaurus, then a category
/// thesaurus built from the unexpanded training text — so the vocabulary
/// sees the expanded tokens.
inline FittedPipeline fit_pipeline(const Corpus<Document>& train, const PipelineConfig& config,
                                   std::uint64_t seed) {
    Corpus<Document> docs = train;
    FittedPipeline fitted;

    if (config.expansion.enabled) {
        ExpansionConfig ec{config.expansion.n, derive_seed(seed, "expand"), config.expansion.side};
        if (config.expansion.category) {
            fitted.category_thesaurus = build_category_thesaurus(
                train, config.expansion.category_weighting, config.expansion.category_max_depth,
                config.stops);
        }
        if (config.expansion.hashtag) {
            expand_corpus(docs, *config.expansion.hashtag, ec, SplitRole::training);
        }
        if (fitted.category_thesaurus) {
            expand_corpus(docs, *fitted.category_thesaurus, ec, SplitRole::training);
        }
    }

    std::vector<std::string> y;
    y.reserve(docs.documents.size());
    for (const Document& d : docs.documents) {
        if (!d.label) throw std::invalid_argument("fit_pipeline requires a fully labeled corpus");
        y.push_back(*d.label);
    }

    fitted.vocab = build_vocabulary(docs.documents, config.ngram_max, config.min_df);
    SparseMatrix X = detail::vectorize(docs.documents, fitted.vocab, config);

    if (config.keep_fraction < 1.0) {
        fitted.mask = select_top(anova_f(X, y), config.keep_fraction);
    } else {
        fitted.mask.keep_fraction = 1.0;
        fitted.mask.scores.assign(fitted.vocab.size(), 0.0);
        fitted.mask.kept_columns.resize(fitted.vocab.size());
        for (std::size_t j = 0; j < fitted.vocab.size(); ++j) {
            fitted.mask.kept_columns[j] = static_cast<std::uint32_t>(j);
        }
    }
    SparseMatrix Xk = apply_mask(X, fitted.mask);

    if (config.learner == LearnerKind::nb) {
        fitted.model = train_nb(Xk, y, config.learner_config.alpha);
    } else {
        LearnerConfig lc = config.learner_config;
        lc.seed = derive_seed(seed, "train");
        fitted.model = train_linear(Xk, y, config.learner, lc);
    }
    fitted.model.feature_columns = fitted.mask.kept_columns;
    fitted.model.vocab_fingerprint = fitted.vocab.fingerprint();
    return fitted;
}

/// Transform and classify held-out documents. Query-side hashtag expansion
/// applies here when configured; category expansion never does (test labels
/// are the answer, not an input).
inline std::vector<std::string> predict_pipeline(const FittedPipeline& fitted,
                                                 const PipelineConfig& config,
                                                 std::vector<Document> docs, std::uint64_t seed) {
    if (config.expansion.enabled && config.expansion.hashtag) {
        ExpansionConfig ec{config.expansion.n, derive_seed(seed, "expand"), config.expansion.side};
        expand_corpus(docs, *config.expansion.hashtag, ec, SplitRole::testing);
    }
    SparseMatrix X = detail::vectorize(docs, fitted.vocab, config);
    return predict(fitted.model, apply_mask(X, fitted.mask));
}

struct CvResult {
    std::vector<MetricsReport> folds;
    MetricsReport mean;
};

/// Stratified k-fold cross-validation of the full pipeline. Each fold refits
/// vocabulary, idf, feature mask, thesauri and model on its training portion
/// only. Module errors inside a fold are re-raised with the fold index.
inline CvResult cross_validate(const Corpus<Document>& corpus, const PipelineConfig& config,
                               std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
    std::vector<std::string> y;
    y.reserve(corpus.documents.size());
    for (const Document& d : corpus.documents) {
        if (!d.label) throw std::invalid_argument("cross_validate requires a fully labeled corpus");
        y.push_back(*d.label);
    }
    auto folds = stratified_kfold(y, k, seed);

    CvResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<char> in_test(corpus.documents.size(), 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;
        Corpus<Document> train;
        std::vector<Document> test;
        std::vector<std::string> truth;
        for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
            if (in_test[i]) {
                test.push_back(corpus.documents[i]);
                truth.push_back(y[i]);
            } else {
                train.documents.push_back(corpus.documents[i]);
            }
        }
        recount_classes(train);
        try {
            FittedPipeline fitted = fit_pipeline(train, config, derive_seed(seed, "cv", f));
            auto preds = predict_pipeline(fitted, config, std::move(test), derive_seed(seed, "cv", f));
            result.folds.push_back(score(preds, truth));
        } catch (const Error& e) {
            throw Error("fold " + std::to_string(f) + ": " + e.what());
        }
    }
    result.mean = mean_report(result.folds);
    return result;
}

}  // namespace stx
