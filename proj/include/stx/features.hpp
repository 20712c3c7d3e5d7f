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

// Feature extraction: vocabulary construction (unigrams, optional bigrams),
// TF-IDF weighting, one-way ANOVA F scoring, and top-fraction selection.
//
// The weighting is deliberately plain: tf is the length-normalized count
// within the document, idf is ln(N/df) with no smoothing. Terms present in
// every document get weight 0 but keep their column so indexing is stable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/sparse.hpp"
#include "stx/textprep.hpp"

namespace stx {

struct Vocabulary {
    std::map<std::string, std::uint32_t> token_to_col;  // lexicographic by construction
    std::vector<std::string> col_to_token;
    int ngram_max = 1;                  // 1 = unigrams, 2 = + adjacent bigrams
    std::vector<std::uint32_t> doc_freq;  // per column, 1..n_docs
    std::size_t n_docs = 0;

    std::size_t size() const { return col_to_token.size(); }

    std::uint64_t fingerprint() const {
        std::uint64_t h = fnv1a64("vocab");
        for (std::size_t j = 0; j < col_to_token.size(); ++j) {
            h = fnv1a64(col_to_token[j] + "\n", h);
            h = mix64(h ^ doc_freq[j]);
        }
        h = mix64(h ^ static_cast<std::uint64_t>(n_docs));
        h = mix64(h ^ static_cast<std::uint64_t>(ngram_max));
        return h;
    }
};

namespace detail {

/// Enumerate a document's features in order: every token, then for
/// ngram_max=2 every adjacent pair joined by one space.
template <class Fn>
void for_each_feature(const Document& doc, int ngram_max, Fn&& fn) {
    for (const std::string& t : doc.tokens) fn(t);
    if (ngram_max >= 2) {
        for (std::size_t i = 0; i + 1 < doc.tokens.size(); ++i) {
            fn(doc.tokens[i] + ' ' + doc.tokens[i + 1]);
        }
    }
}

}  // namespace detail

/// Scan the corpus and assign one column per surviving feature, ordered
/// lexicographically. Features in fewer than min_df documents are dropped.
inline Vocabulary build_vocabulary(const std::vector<Document>& docs, int ngram_max,
                                   std::uint32_t min_df = 1) {
    if (docs.empty()) throw std::invalid_argument("build_vocabulary: corpus is empty");
    if (ngram_max != 1 && ngram_max != 2) {
        throw std::invalid_argument("ngram_max must be 1 or 2");
    }
    if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");

    std::map<std::string, std::uint32_t> df;
    std::vector<std::string> doc_feats;
    for (const Document& d : docs) {
        doc_feats.clear();
        detail::for_each_feature(d, ngram_max, [&](const std::string& f) {
            doc_feats.push_back(f);
        });
        std::sort(doc_feats.begin(), doc_feats.end());
        doc_feats.erase(std::unique(doc_feats.begin(), doc_feats.end()), doc_feats.end());
        for (const std::string& f : doc_feats) ++df[f];
    }

    Vocabulary vocab;
    vocab.ngram_max = ngram_max;
    vocab.n_docs = docs.size();
    for (const auto& [feat, count] : df) {
        if (count < min_df) continue;
        vocab.token_to_col.emplace(feat, static_cast<std::uint32_t>(vocab.col_to_token.size()));
        vocab.col_to_token.push_back(feat);
        vocab.doc_freq.push_back(count);
    }
    if (vocab.col_to_token.empty()) {
        throw EmptyVocabularyError("no feature meets min_df=" + std::to_string(min_df));
    }
    return vocab;
}

namespace detail {

/// In-vocabulary feature counts of one document, sorted by column.
inline std::map<std::uint32_t, double> count_in_vocab(const Document& doc, const Vocabulary& vocab) {
    std::map<std::uint32_t, double> counts;
    for_each_feature(doc, vocab.ngram_max, [&](const std::string& f) {
        auto it = vocab.token_to_col.find(f);
        if (it != vocab.token_to_col.end()) counts[it->second] += 1.0;
    });
    return counts;
}

}  // namespace detail

/// entry(i,j) = tf · idf with tf = count_ij / (total in-vocabulary count of
/// doc i) and idf = ln(n_docs / df_j). Out-of-vocabulary tokens are ignored,
/// and a document with no in-vocabulary feature yields an all-zero row.
inline SparseMatrix tfidf(const std::vector<Document>& docs, const Vocabulary& vocab) {
    std::vector<double> idf(vocab.size());
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        idf[j] = std::log(static_cast<double>(vocab.n_docs) / static_cast<double>(vocab.doc_freq[j]));
    }
    SparseMatrix m;
    m.cols = vocab.size();
    std::vector<std::pair<std::uint32_t, double>> row;
    for (const Document& d : docs) {
        auto counts = detail::count_in_vocab(d, vocab);
        double total = 0.0;
        for (const auto& [col, c] : counts) total += c;
        row.clear();
        for (const auto& [col, c] : counts) {
            double v = (c / total) * idf[col];
            if (v != 0.0) row.emplace_back(col, v);
        }
        m.append_row(row);
    }
    return m;
}

/// Raw in-document counts over the vocabulary columns (multinomial NB's
/// native input when the --nb-counts option is chosen).
inline SparseMatrix term_counts(const std::vector<Document>& docs, const Vocabulary& vocab) {
    SparseMatrix m;
    m.cols = vocab.size();
    std::vector<std::pair<std::uint32_t, double>> row;
    for (const Document& d : docs) {
        auto counts = detail::count_in_vocab(d, vocab);
        row.assign(counts.begin(), counts.end());
        m.append_row(row);
    }
    return m;
}

/// One-way ANOVA F statistic per column:
///   F = [Σ_c n_c(μ_c − μ)² / (k−1)] / [Σ_c Σ_{i∈c}(x_i − μ_c)² / (n−k)]
/// computed over stored entries plus the implicit zeros. A column that
/// separates classes perfectly (within-SS 0, between-SS > 0) scores the
/// largest finite double so sorting stays total; an all-constant column
/// scores 0.
inline std::vector<double> anova_f(const SparseMatrix& m, const std::vector<std::string>& labels) {
    if (labels.size() != m.rows) throw std::invalid_argument("anova_f: labels/rows mismatch");
    std::map<std::string, std::uint32_t> class_ids;
    for (const std::string& l : labels) class_ids.emplace(l, static_cast<std::uint32_t>(class_ids.size()));
    const std::size_t k = class_ids.size();
    if (k < 2) throw DegenerateLabelsError("anova_f needs at least 2 classes");

    std::vector<std::uint32_t> row_class(m.rows);
    std::vector<double> class_n(k, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        row_class[i] = class_ids.at(labels[i]);
        class_n[row_class[i]] += 1.0;
    }

    const std::size_t V = m.cols;
    std::vector<double> sum(k * V, 0.0);
    std::vector<double> nnz(k * V, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(row_class[i]) * V;
        for (std::size_t p = m.row_begin(i); p < m.row_end(i); ++p) {
            sum[base + m.indices[p]] += m.values[p];
            nnz[base + m.indices[p]] += 1.0;
        }
    }

    std::vector<double> mean(k * V);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < V; ++j) mean[c * V + j] = sum[c * V + j] / class_n[c];
    }

    std::vector<double> ssw(V, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(row_class[i]) * V;
        for (std::size_t p = m.row_begin(i); p < m.row_end(i); ++p) {
            double d = m.values[p] - mean[base + m.indices[p]];
            ssw[m.indices[p]] += d * d;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < V; ++j) {
            double zeros = class_n[c] - nnz[c * V + j];
            double mu = mean[c * V + j];
            ssw[j] += zeros * mu * mu;  // implicit zeros contribute (0 − μ_c)²
        }
    }

    const double n = static_cast<double>(m.rows);
    std::vector<double> f(V);
    for (std::size_t j = 0; j < V; ++j) {
        double grand = 0.0;
        for (std::size_t c = 0; c < k; ++c) grand += sum[c * V + j];
        grand /= n;
        double ssb = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double d = mean[c * V + j] - grand;
            ssb += class_n[c] * d * d;
        }
        if (ssw[j] == 0.0) {
            f[j] = ssb > 0.0 ? std::numeric_limits<double>::max() : 0.0;
        } else {
            double msb = ssb / static_cast<double>(k - 1);
            double msw = ssw[j] / (n - static_cast<double>(k));
            f[j] = msb / msw;
        }
    }
    return f;
}

struct FeatureMask {
    std::vector<std::uint32_t> kept_columns;  // sorted ascending
    std::vector<double> scores;               // per original column
    double keep_fraction = 1.0;
};

/// Keep the max(1, floor(keep_fraction·V)) highest-scoring columns, ties
/// broken toward the lower column index.
inline FeatureMask select_top(const std::vector<double>& scores, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw std::invalid_argument("keep_fraction must be in (0, 1]");
    }
    const std::size_t V = scores.size();
    // small epsilon so fractions like 2/3 of 3 columns keep 2, not 1
    auto kept = static_cast<std::size_t>(
        std::floor(keep_fraction * static_cast<double>(V) + 1e-9));
    if (kept < 1) kept = 1;
    if (kept > V) kept = V;

    std::vector<std::uint32_t> order(V);
    for (std::size_t j = 0; j < V; ++j) order[j] = static_cast<std::uint32_t>(j);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    FeatureMask mask;
    mask.kept_columns.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept));
    std::sort(mask.kept_columns.begin(), mask.kept_columns.end());
    mask.scores = scores;
    mask.keep_fraction = keep_fraction;
    return mask;
}

/// Project a matrix onto the mask's columns, renumbering densely and
/// preserving row order.
inline SparseMatrix apply_mask(const SparseMatrix& m, const FeatureMask& mask) {
    std::vector<std::int64_t> remap(m.cols, -1);
    for (std::size_t new_col = 0; new_col < mask.kept_columns.size(); ++new_col) {
        remap[mask.kept_columns[new_col]] = static_cast<std::int64_t>(new_col);
    }
    SparseMatrix out;
    out.cols = mask.kept_columns.size();
    std::vector<std::pair<std::uint32_t, double>> row;
    for (std::size_t i = 0; i < m.rows; ++i) {
        row.clear();
        for (std::size_t p = m.row_begin(i); p < m.row_end(i); ++p) {
            std::int64_t nc = remap[m.indices[p]];
            if (nc >= 0) row.emplace_back(static_cast<std::uint32_t>(nc), m.values[p]);
        }
        out.append_row(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization ("STXF1")

inline json vocabulary_to_json(const Vocabulary& vocab) {
    json words = json::object();
    for (const auto& [tok, col] : vocab.token_to_col) words[tok] = col;
    return json{{"words", words},
                {"ngram_max", vocab.ngram_max},
                {"doc_freq", vocab.doc_freq},
                {"n_docs", vocab.n_docs}};
}

inline Vocabulary vocabulary_from_json(const json& j) {
    Vocabulary vocab;
    vocab.ngram_max = j.at("ngram_max").get<int>();
    vocab.n_docs = j.at("n_docs").get<std::size_t>();
    vocab.doc_freq = j.at("doc_freq").get<std::vector<std::uint32_t>>();
    const json& words = j.at("words");
    vocab.col_to_token.resize(words.size());
    for (auto it = words.begin(); it != words.end(); ++it) {
        auto col = it.value().get<std::uint32_t>();
        vocab.token_to_col.emplace(it.key(), col);
        if (col >= vocab.col_to_token.size()) throw FormatError("vocabulary column out of range");
        vocab.col_to_token[col] = it.key();
    }
    if (vocab.doc_freq.size() != vocab.col_to_token.size()) {
        throw FormatError("vocabulary doc_freq length mismatch");
    }
    return vocab;
}

inline void save_features(const std::filesystem::path& path, const SparseMatrix& m,
                          const Vocabulary& vocab, const std::string& manifest_hash) {
    json j{{"magic", "STXF1"},
           {"rows", m.rows},
           {"cols", m.cols},
           {"indptr", m.indptr},
           {"indices", m.indices},
           {"values", m.values},
           {"vocabulary", vocabulary_to_json(vocab)}};
    if (!manifest_hash.empty()) j["manifest_hash"] = manifest_hash;
    atomic_write(path, j.dump(2) + "\n");
}

inline std::pair<SparseMatrix, Vocabulary> load_features(const std::filesystem::path& path) {
    json j = parse_lenient(read_file(path));
    if (j.is_discarded() || !j.is_object() || j.value("magic", "") != "STXF1") {
        throw FormatError("not a feature file (missing STXF1 magic): " + path.string());
    }
    SparseMatrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.indptr = j.at("indptr").get<std::vector<std::size_t>>();
    m.indices = j.at("indices").get<std::vector<std::uint32_t>>();
    m.values = j.at("values").get<std::vector<double>>();
    if (m.indptr.size() != m.rows + 1 || m.indices.size() != m.values.size() ||
        m.indptr.back() != m.indices.size()) {
        throw FormatError("inconsistent sparse matrix arrays in " + path.string());
    }
    return {std::move(m), vocabulary_from_json(j.at("vocabulary"))};
}

}  // namespace stx
