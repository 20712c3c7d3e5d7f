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

// Thesaurus-based expansion. A thesaurus maps a key — hashtag or category —
// to a ranked word list mined from an auxiliary corpus; expansion appends
// n words drawn from a key's top 2n list to a document. Counting uses
// exact integer accumulators so building from shards and merging equals a
// single pass, bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stx/corpus.hpp"
#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"
#include "stx/textprep.hpp"

namespace stx {

enum class ThesaurusKind { hashtag, category };
enum class ThesaurusWeighting { frequency, tfidf };

inline const char* to_string(ThesaurusKind k) {
    return k == ThesaurusKind::hashtag ? "hashtag" : "category";
}
inline const char* to_string(ThesaurusWeighting w) {
    return w == ThesaurusWeighting::frequency ? "frequency" : "tfidf";
}
inline ThesaurusWeighting weighting_from_string(const std::string& s) {
    if (s == "frequency") return ThesaurusWeighting::frequency;
    if (s == "tfidf") return ThesaurusWeighting::tfidf;
    throw std::invalid_argument("unknown thesaurus weighting: " + s);
}

struct Thesaurus {
    ThesaurusKind kind = ThesaurusKind::hashtag;
    ThesaurusWeighting weighting = ThesaurusWeighting::frequency;
    std::size_t max_depth = 50;  // words stored per key
    std::map<std::string, std::vector<std::pair<std::string, double>>> entries;
    std::string built_from;  // corpus descriptor + stop-list hash
};

namespace detail {

inline std::string unhash(const std::string& token) {
    return !token.empty() && token.front() == '#' ? token.substr(1) : token;
}

// rank (count/score desc, word asc) and truncate
template <class V>
std::vector<std::pair<std::string, double>> ranked(const std::map<std::string, V>& scores,
                                                   std::size_t max_depth) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(scores.size());
    for (const auto& [word, s] : scores) out.emplace_back(word, static_cast<double>(s));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (out.size() > max_depth) out.resize(max_depth);
    return out;
}

}  // namespace detail

/// Streaming accumulator for hashtag co-occurrence counts. add() consumes
/// one normalized document; merge() folds in another shard's counts
/// (integer addition, hence associative and order-free).
struct HashtagCounts {
    std::map<std::string, std::map<std::string, std::uint64_t>> counts;  // hashtag → token → occurrences
    std::map<std::string, std::uint64_t> doc_support;                    // hashtag → documents seen in

    void add(const Document& doc, const StopLists& stops) {
        for (const std::string& h : doc.hashtags) {
            ++doc_support[h];
            std::map<std::string, std::uint64_t>& words = counts[h];
            const std::string own = detail::unhash(h);
            for (const std::string& t : doc.tokens) {
                if (t == h || t == own) continue;
                if (stops.contains(detail::unhash(t))) continue;
                ++words[t];
            }
        }
    }

    void merge(const HashtagCounts& other) {
        for (const auto& [h, words] : other.counts) {
            auto& mine = counts[h];
            for (const auto& [w, c] : words) mine[w] += c;
        }
        for (const auto& [h, c] : other.doc_support) doc_support[h] += c;
    }

    /// Hashtags seen in fewer than min_support documents are dropped, as are
    /// keys whose co-occurrence list came out empty (stop-words-only
    /// neighborhoods).
    Thesaurus finalize(std::size_t max_depth, std::uint64_t min_support,
                       const std::string& built_from) const {
        Thesaurus t;
        t.kind = ThesaurusKind::hashtag;
        t.weighting = ThesaurusWeighting::frequency;
        t.max_depth = max_depth;
        t.built_from = built_from;
        for (const auto& [h, words] : counts) {
            auto support_it = doc_support.find(h);
            if (support_it == doc_support.end() || support_it->second < min_support) continue;
            auto list = detail::ranked(words, max_depth);
            if (!list.empty()) t.entries.emplace(h, std::move(list));
        }
        return t;
    }
};

inline Thesaurus build_hashtag_thesaurus(const std::vector<Document>& docs, const StopLists& stops,
                                         std::size_t max_depth = 50, std::uint64_t min_support = 2,
                                         const std::string& built_from = "") {
    HashtagCounts acc;
    for (const Document& d : docs) acc.add(d, stops);
    return acc.finalize(max_depth, min_support, built_from);
}

/// Per-category word counts; finalize ranks by raw frequency or by tf·idf
/// over the k category pseudo-documents (each category's concatenated text
/// counts as one document for df purposes).
struct CategoryCounts {
    std::map<std::string, std::map<std::string, std::uint64_t>> counts;  // category → word → count

    static bool alphabetic_only(const std::string& w) {
        if (w.empty()) return false;
        for (char c : w) {
            if (c < 'a' || c > 'z') return false;
        }
        return true;
    }

    void add(const Document& doc, const StopLists& stops) {
        if (!doc.label) return;
        std::map<std::string, std::uint64_t>& words = counts[*doc.label];
        for (const std::string& t : doc.tokens) {
            if (!alphabetic_only(t)) continue;
            if (stops.contains(t)) continue;
            ++words[t];
        }
    }

    void merge(const CategoryCounts& other) {
        for (const auto& [cat, words] : other.counts) {
            auto& mine = counts[cat];
            for (const auto& [w, c] : words) mine[w] += c;
        }
    }

    Thesaurus finalize(ThesaurusWeighting weighting, std::size_t max_depth,
                       const std::string& built_from,
                       std::vector<std::string>* warnings = nullptr) const {
        Thesaurus t;
        t.kind = ThesaurusKind::category;
        t.weighting = weighting;
        t.max_depth = max_depth;
        t.built_from = built_from;

        // drop each key's own word before any ranking
        std::map<std::string, std::map<std::string, std::uint64_t>> kept;
        for (const auto& [cat, words] : counts) {
            std::string own = ascii_lower(cat);
            auto& mine = kept[cat];
            for (const auto& [w, c] : words) {
                if (w != own) mine.emplace(w, c);
            }
        }

        const std::size_t k = kept.size();
        if (weighting == ThesaurusWeighting::tfidf && k == 1 && warnings) {
            warnings->push_back("single category: every idf is 0, ranking falls back to lexicographic");
        }

        std::map<std::string, std::uint64_t> df;  // word → number of categories containing it
        if (weighting == ThesaurusWeighting::tfidf) {
            for (const auto& [cat, words] : kept) {
                (void)cat;
                for (const auto& [w, c] : words) {
                    (void)c;
                    ++df[w];
                }
            }
        }

        for (const auto& [cat, words] : kept) {
            if (words.empty()) {
                if (warnings) {
                    warnings->push_back("category '" + cat + "' has no usable words; omitted");
                }
                continue;
            }
            if (weighting == ThesaurusWeighting::frequency) {
                t.entries.emplace(cat, detail::ranked(words, max_depth));
            } else {
                double total = 0.0;
                for (const auto& [w, c] : words) {
                    (void)w;
                    total += static_cast<double>(c);
                }
                std::map<std::string, double> scores;
                for (const auto& [w, c] : words) {
                    double idf = std::log(static_cast<double>(k) / static_cast<double>(df.at(w)));
                    scores[w] = (static_cast<double>(c) / total) * idf;
                }
                t.entries.emplace(cat, detail::ranked(scores, max_depth));
            }
        }
        return t;
    }
};

/// The corpus must be the TRAINING split — taking the labeled corpus object
/// (not a bare document list) is what keeps test text out of the thesaurus.
inline Thesaurus build_category_thesaurus(const Corpus<Document>& train,
                                          ThesaurusWeighting weighting, std::size_t max_depth,
                                          const StopLists& stops, const std::string& built_from = "",
                                          std::vector<std::string>* warnings = nullptr) {
    CategoryCounts acc;
    for (const Document& d : train.documents) acc.add(d, stops);
    return acc.finalize(weighting, max_depth, built_from, warnings);
}

enum class ExpansionSide { document, query, both };
enum class SplitRole { training, testing };

inline const char* to_string(ExpansionSide s) {
    switch (s) {
        case ExpansionSide::document: return "document";
        case ExpansionSide::query: return "query";
        default: return "both";
    }
}

inline ExpansionSide side_from_string(const std::string& s) {
    if (s == "document") return ExpansionSide::document;
    if (s == "query") return ExpansionSide::query;
    if (s == "both") return ExpansionSide::both;
    throw std::invalid_argument("unknown expansion side: " + s);
}

struct ExpansionConfig {
    std::size_t n = 0;  // words to add per key
    std::uint64_t seed = 0;
    ExpansionSide side = ExpansionSide::document;
};

/// Append, for each key applicable to the document (its hashtags, or its
/// label for a category thesaurus), n distinct words drawn uniformly from
/// the key's top-2n list; a shorter list caps the draw at its length. The
/// draw is keyed on (seed, doc id, key), so results do not depend on
/// processing order, and repeated expansion of the same document agrees.
/// Keys missing from the thesaurus are skipped. Appended words go to
/// tokens only — the hashtag set never grows.
inline Document expand(const Document& doc, const Thesaurus& thesaurus,
                       const ExpansionConfig& config) {
    if (2 * config.n > thesaurus.max_depth) {
        throw std::invalid_argument("expansion n too large: 2n exceeds thesaurus depth " +
                                    std::to_string(thesaurus.max_depth));
    }
    Document out = doc;
    if (config.n == 0) return out;

    std::vector<std::string> keys;
    if (thesaurus.kind == ThesaurusKind::hashtag) {
        keys.assign(doc.hashtags.begin(), doc.hashtags.end());
    } else if (doc.label) {
        keys.push_back(*doc.label);
    }
    for (const std::string& key : keys) {
        auto it = thesaurus.entries.find(key);
        if (it == thesaurus.entries.end()) continue;
        const auto& list = it->second;
        std::size_t pool = std::min(2 * config.n, list.size());
        std::size_t take = std::min(config.n, pool);
        Rng rng(derive_seed(config.seed, doc.id, key));
        for (std::size_t idx : sample_without_replacement(pool, take, rng)) {
            out.tokens.push_back(list[idx].first);
        }
    }
    return out;
}

struct ExpansionStats {
    std::size_t documents_touched = 0;
    std::size_t words_added = 0;
};

/// Expand a whole split in place, honoring config.side: `document` touches
/// the training split only, `query` the test split only, `both` touches
/// both. Category thesauri additionally never apply to test documents —
/// test labels are the answer, not an input.
inline ExpansionStats expand_corpus(std::vector<Document>& docs, const Thesaurus& thesaurus,
                                    const ExpansionConfig& config, SplitRole role) {
    bool applies;
    if (role == SplitRole::training) {
        applies = config.side == ExpansionSide::document || config.side == ExpansionSide::both;
    } else {
        applies = (config.side == ExpansionSide::query || config.side == ExpansionSide::both) &&
                  thesaurus.kind != ThesaurusKind::category;
    }
    ExpansionStats stats;
    if (!applies) return stats;
    for (Document& d : docs) {
        Document expanded = expand(d, thesaurus, config);
        std::size_t added = expanded.tokens.size() - d.tokens.size();
        if (added > 0) {
            ++stats.documents_touched;
            stats.words_added += added;
            d = std::move(expanded);
        }
    }
    return stats;
}

inline ExpansionStats expand_corpus(Corpus<Document>& corpus, const Thesaurus& thesaurus,
                                    const ExpansionConfig& config, SplitRole role) {
    return expand_corpus(corpus.documents, thesaurus, config, role);
}

// ---------------------------------------------------------------------------
// serialization ("STXT1")

inline void save_thesaurus(const std::filesystem::path& path, const Thesaurus& t,
                           const std::string& manifest_hash) {
    json entries = json::object();
    for (const auto& [key, list] : t.entries) {
        json rows = json::array();
        for (const auto& [word, score] : list) rows.push_back(json::array({word, score}));
        entries[key] = std::move(rows);
    }
    json j{{"magic", "STXT1"},
           {"kind", to_string(t.kind)},
           {"weighting", to_string(t.weighting)},
           {"max_depth", t.max_depth},
           {"entries", entries},
           {"built_from", t.built_from}};
    if (!manifest_hash.empty()) j["manifest_hash"] = manifest_hash;
    atomic_write(path, j.dump(2) + "\n");
}

inline Thesaurus load_thesaurus(const std::filesystem::path& path) {
    json j = parse_lenient(read_file(path));
    if (j.is_discarded() || !j.is_object() || j.value("magic", "") != "STXT1") {
        throw FormatError("not a thesaurus file (missing STXT1 magic): " + path.string());
    }
    Thesaurus t;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "hashtag") t.kind = ThesaurusKind::hashtag;
    else if (kind == "category") t.kind = ThesaurusKind::category;
    else throw FormatError("unknown thesaurus kind: " + kind);
    t.weighting = weighting_from_string(j.at("weighting").get<std::string>());
    t.max_depth = j.at("max_depth").get<std::size_t>();
    t.built_from = j.value("built_from", "");
    const json& entries = j.at("entries");
    for (auto it = entries.begin(); it != entries.end(); ++it) {
        std::vector<std::pair<std::string, double>> list;
        for (const json& row : it.value()) {
            list.emplace_back(row.at(0).get<std::string>(), row.at(1).get<double>());
        }
        t.entries.emplace(it.key(), std::move(list));
    }
    return t;
}

}  // namespace stx
