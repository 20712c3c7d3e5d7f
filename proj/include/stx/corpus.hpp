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

// Corpus ingestion and filtering: read JSONL tweet/review records, drop
// retweets, attach root-category labels, prune rare classes, and split
// train/test with per-class stratification.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"
#include "stx/unicode.hpp"

namespace stx {

enum class Source { twitter, amazon };

inline const char* to_string(Source s) { return s == Source::twitter ? "twitter" : "amazon"; }

/// One input record as it appears on disk, before any text processing.
struct RawRecord {
    std::string id;
    std::string text;
    std::optional<std::string> retweet_of;   // id of the original tweet
    std::optional<std::string> label_node;   // browse-node id, pre-resolution
    std::optional<std::string> root_category; // filled in by filter_corpus
    Source source = Source::twitter;
};

inline const std::optional<std::string>& doc_label(const RawRecord& r) { return r.root_category; }

struct IngestResult {
    std::vector<RawRecord> records;
    std::size_t read = 0;     // usable records
    std::size_t skipped = 0;  // malformed lines, bad fields, duplicate ids
};

/// Read a JSONL file of records in file order. Malformed lines are counted
/// and skipped; blank lines and "_meta" bookkeeping lines are ignored.
/// Throws IoError if the file cannot be read and FormatError when more than
/// half of the record lines are unusable (almost always a wrong-file mistake).
inline IngestResult ingest(const std::filesystem::path& path, Source source) {
    IngestResult result;
    std::unordered_set<std::string> seen_ids;

    const auto string_field = [](const json& j, const char* key,
                                 std::optional<std::string>& out) -> bool {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return true;  // absent is fine
        if (!it->is_string()) return false;
        std::string v = it->get<std::string>();
        if (!v.empty()) out = std::move(v);
        return true;
    };

    for_each_line(path, [&](std::string_view line) {
        if (trim_spaces(line).empty()) return;
        json j = parse_lenient(line);
        if (j.is_discarded() || !j.is_object()) {
            ++result.skipped;
            return;
        }
        if (is_meta_line(j)) return;

        RawRecord rec;
        rec.source = source;
        auto id_it = j.find("id");
        auto text_it = j.find("text");
        if (id_it == j.end() || !id_it->is_string() || text_it == j.end() || !text_it->is_string()) {
            ++result.skipped;
            return;
        }
        rec.id = id_it->get<std::string>();
        rec.text = text_it->get<std::string>();
        if (rec.id.empty() || trim_spaces(rec.text).empty()) {
            ++result.skipped;
            return;
        }
        if (!string_field(j, "retweet_of", rec.retweet_of) ||
            !string_field(j, "label_node", rec.label_node) ||
            !string_field(j, "root_category", rec.root_category)) {
            ++result.skipped;
            return;
        }
        if (!seen_ids.insert(rec.id).second) {
            ++result.skipped;  // duplicate id
            return;
        }
        result.records.push_back(std::move(rec));
        ++result.read;
    });

    if (result.skipped > result.read) {
        throw FormatError("more than half of " + path.string() + " is malformed (" +
                          std::to_string(result.skipped) + " skipped, " +
                          std::to_string(result.read) + " read)");
    }
    return result;
}

/// A labeled corpus: every document carries a root-category label and every
/// class meets the size floor recorded in min_class_size.
template <class D>
struct Corpus {
    std::vector<D> documents;
    std::map<std::string, std::size_t> class_counts;
    std::size_t min_class_size = 0;
};

template <class D>
void recount_classes(Corpus<D>& corpus) {
    corpus.class_counts.clear();
    for (const D& d : corpus.documents) {
        if (doc_label(d)) ++corpus.class_counts[*doc_label(d)];
    }
    corpus.min_class_size = 0;
    for (const auto& [cls, n] : corpus.class_counts) {
        (void)cls;
        if (corpus.min_class_size == 0 || n < corpus.min_class_size) corpus.min_class_size = n;
    }
}

struct FilterStats {
    std::size_t retweets_removed = 0;
    std::size_t unlabeled_removed = 0;
    std::size_t rare_class_removed = 0;
};

/// Clean-up pass from raw records to a labeled corpus. Removal order is
/// fixed and runs exactly once: retweets first, then records without a
/// label, then classes whose post-retweet count is below min_class_size.
/// Pruning does not cascade. `labels` maps browse-node id → root category;
/// a record naming an unknown node is a data error, not a silent drop.
inline Corpus<RawRecord> filter_corpus(const std::vector<RawRecord>& records,
                                       const std::map<std::string, std::string>& labels,
                                       std::size_t min_class_size,
                                       FilterStats* stats = nullptr) {
    if (min_class_size < 1) throw std::invalid_argument("min_class_size must be >= 1");

    FilterStats local;
    std::vector<RawRecord> labeled;
    labeled.reserve(records.size());
    std::map<std::string, std::size_t> counts;
    for (const RawRecord& r : records) {
        if (r.retweet_of) {
            ++local.retweets_removed;
            continue;
        }
        if (!r.label_node) {
            ++local.unlabeled_removed;
            continue;
        }
        auto it = labels.find(*r.label_node);
        if (it == labels.end()) throw UnknownNodeError(*r.label_node);
        RawRecord kept = r;
        kept.root_category = it->second;
        ++counts[it->second];
        labeled.push_back(std::move(kept));
    }

    Corpus<RawRecord> out;
    out.min_class_size = min_class_size;
    for (RawRecord& r : labeled) {
        if (counts[*r.root_category] < min_class_size) {
            ++local.rare_class_removed;
            continue;
        }
        out.documents.push_back(std::move(r));
    }
    for (const auto& [cls, n] : counts) {
        if (n >= min_class_size) out.class_counts[cls] = n;
    }
    if (stats) *stats = local;
    if (out.documents.empty()) {
        throw EmptyCorpusError("no documents survive filtering (retweets removed: " +
                               std::to_string(local.retweets_removed) + ", unlabeled: " +
                               std::to_string(local.unlabeled_removed) + ", rare-class: " +
                               std::to_string(local.rare_class_removed) + ")");
    }
    return out;
}

/// Stratified split: per class, round(test_fraction × n) documents — at
/// least 1 — go to test, chosen by a seeded shuffle. Document order inside
/// each half follows the input corpus. Deterministic given the seed.
template <class D>
std::pair<Corpus<D>, Corpus<D>> train_test_split(const Corpus<D>& corpus, double test_fraction,
                                                 std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must be in (0, 1)");
    }
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        const auto& label = doc_label(corpus.documents[i]);
        if (!label) throw std::invalid_argument("train_test_split requires a fully labeled corpus");
        by_class[*label].push_back(i);
    }
    std::vector<char> in_test(corpus.documents.size(), 0);
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 2) {
            throw StratificationError(cls, "class '" + cls + "' has " +
                                              std::to_string(idx.size()) +
                                              " document(s); need at least 2 to split");
        }
        Rng rng(derive_seed(seed, "split", cls));
        shuffle(idx, rng);
        auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        if (n_test < 1) n_test = 1;
        if (n_test > idx.size()) n_test = idx.size();
        for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = 1;
    }
    std::pair<Corpus<D>, Corpus<D>> halves;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        (in_test[i] ? halves.second : halves.first).documents.push_back(corpus.documents[i]);
    }
    recount_classes(halves.first);
    recount_classes(halves.second);
    return halves;
}

}  // namespace stx
