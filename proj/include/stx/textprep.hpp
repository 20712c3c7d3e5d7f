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

// Text normalization: lowercase, drop URLs, tokenize, strip punctuation
// (keeping a token-initial '#'), remove stop words, stem. The pipeline is
// idempotent on its own output, which lets prepared corpora round-trip
// through the same JSONL format as raw input.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "stx/corpus.hpp"
#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"
#include "stx/unicode.hpp"

namespace stx {

// ---------------------------------------------------------------------------
// stop lists

namespace detail {

// Apostrophe-free contraction forms on purpose: punctuation is stripped
// before stop matching, so "don't" arrives here as "dont".
inline const std::array<const char*, 171>& general_stop_words() {
    static const std::array<const char*, 171> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
        "any", "are", "arent", "as", "at", "be", "because", "been", "before", "being",
        "below", "between", "both", "but", "by", "cannot", "cant", "could", "couldnt",
        "did", "didnt", "do", "does", "doesnt", "doing", "dont", "down", "during",
        "each", "few", "for", "from", "further", "had", "hadnt", "has", "hasnt",
        "have", "havent", "having", "he", "hed", "hell", "her", "here", "heres",
        "hers", "herself", "hes", "him", "himself", "his", "how", "hows", "i", "id",
        "if", "ill", "im", "in", "into", "is", "isnt", "it", "its", "itself", "ive",
        "lets", "me", "more", "most", "mustnt", "my", "myself", "no", "nor", "not",
        "of", "off", "on", "once", "only", "or", "other", "ought", "our", "ours",
        "ourselves", "out", "over", "own", "same", "shant", "she", "shed", "shell",
        "shes", "should", "shouldnt", "so", "some", "such", "than", "that", "thats",
        "the", "their", "theirs", "them", "themselves", "then", "there", "theres",
        "these", "they", "theyd", "theyll", "theyre", "theyve", "this", "those",
        "through", "to", "too", "under", "until", "up", "very", "was", "wasnt", "we",
        "wed", "well", "were", "werent", "weve", "what", "whats", "when", "whens",
        "where", "wheres", "which", "while", "who", "whom", "whos", "whys", "why",
        "with", "wont", "would", "wouldnt", "you", "youd", "youll", "youre", "yours",
        "yourself", "yourselves", "your",
    };
    return words;
}

inline const std::array<const char*, 24>& twitter_stop_words() {
    static const std::array<const char*, 24> words = {
        "rt", "via", "amp", "gt", "lt", "quot", "tco", "mt", "ff", "dm", "cc",
        "lol", "omg", "btw", "fyi", "icymi", "smh", "imo", "imho", "irl", "tbh",
        "tbt", "ftw", "nsfw",
    };
    return words;
}

}  // namespace detail

struct StopLists {
    std::set<std::string> general;
    std::set<std::string> platform;  // Twitter-specific

    bool contains(const std::string& word) const {
        return general.count(word) > 0 || platform.count(word) > 0;
    }

    /// Order-independent fingerprint, recorded in run metadata and thesauri.
    std::uint64_t hash() const {
        std::uint64_t h = fnv1a64("general");
        for (const auto& w : general) h = fnv1a64(w + "\n", h);
        h = fnv1a64("platform", h);
        for (const auto& w : platform) h = fnv1a64(w + "\n", h);
        return h;
    }

    static StopLists builtin() {
        StopLists s;
        for (const char* w : detail::general_stop_words()) s.general.insert(w);
        for (const char* w : detail::twitter_stop_words()) s.platform.insert(w);
        return s;
    }

    /// One lowercase word per line; '#' starts a comment; blank lines ignored.
    static std::set<std::string> load_list(const std::filesystem::path& path) {
        std::set<std::string> words;
        for_each_line(path, [&](std::string_view line) {
            std::string_view t = trim_spaces(line);
            if (t.empty() || t.front() == '#') return;
            words.insert(ascii_lower(t));
        });
        return words;
    }

    static StopLists load(const std::filesystem::path& general_path,
                          const std::filesystem::path& platform_path) {
        return StopLists{load_list(general_path), load_list(platform_path)};
    }
};

// ---------------------------------------------------------------------------
// stemming

enum class Stemmer { none, suffix };

inline Stemmer stemmer_from_string(const std::string& s) {
    if (s == "none") return Stemmer::none;
    if (s == "suffix") return Stemmer::suffix;
    throw std::invalid_argument("unknown stemmer: " + s);
}

inline const char* to_string(Stemmer s) { return s == Stemmer::none ? "none" : "suffix"; }

namespace detail {

inline bool has_ascii_vowel(std::string_view w) {
    for (char c : w) {
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
    }
    return false;
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

// undo consonant doubling left by -ing/-ed removal: "runn" → "run"
inline void undouble(std::string& w) {
    if (w.size() < 2) return;
    char c = w.back();
    if (w[w.size() - 2] != c) return;
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return;
    if (c == 'l' || c == 's' || c == 'z') return;
    w.pop_back();
}

// One rewrite pass. Returns true if it changed the word.
inline bool stem_pass(std::string& w) {
    if (ends_with(w, "sses")) {
        w.erase(w.size() - 2);  // sses → ss
        return true;
    }
    if (ends_with(w, "ies") && w.size() >= 4) {
        w.erase(w.size() - 3);
        w.push_back('y');
        return true;
    }
    if (ends_with(w, "ss")) return false;  // "class" stays put
    if (ends_with(w, "s") && w.size() >= 3) {
        w.pop_back();
        return true;
    }
    if (ends_with(w, "ing") && w.size() >= 6 && has_ascii_vowel(w.substr(0, w.size() - 3))) {
        w.erase(w.size() - 3);
        undouble(w);
        return true;
    }
    if (ends_with(w, "ed") && w.size() >= 5 && has_ascii_vowel(w.substr(0, w.size() - 2))) {
        w.erase(w.size() - 2);
        undouble(w);
        return true;
    }
    return false;
}

}  // namespace detail

/// Deterministic suffix-stripping stemmer covering plural/-ing/-ed classes.
/// Iterates its rewrite rules to a fixed point, so stemming twice equals
/// stemming once — the normalization idempotence test leans on this.
inline std::string stem_suffix(std::string word) {
    while (detail::stem_pass(word)) {
    }
    return word;
}

inline std::string apply_stemmer(Stemmer stemmer, std::string word) {
    return stemmer == Stemmer::suffix ? stem_suffix(std::move(word)) : word;
}

// ---------------------------------------------------------------------------
// normalization

/// One short text after normalization.
struct Document {
    std::string id;
    std::vector<std::string> tokens;       // ordered, lowercase, stop-free
    std::set<std::string> hashtags;        // stored with their leading '#'
    std::optional<std::string> label;      // root category, when known
};

inline const std::optional<std::string>& doc_label(const Document& d) { return d.label; }

namespace detail {

// URL spotting happens on the raw token before punctuation is stripped.
// Besides scheme and www. prefixes, bare shortener tokens like "t.co/xyz"
// count: a dotted host followed by a non-empty path.
inline bool looks_like_url(std::string_view token) {
    // peel leading wrappers: "(http://x" etc.
    std::size_t i = 0;
    while (i < token.size()) {
        std::size_t j = i;
        char32_t cp = decode_utf8(token, j);
        if (cp != '#' && is_strippable_cp(cp)) {
            i = j;
            continue;
        }
        break;
    }
    std::string_view t = token.substr(i);
    if (t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")) return true;

    std::size_t slash = t.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 >= t.size()) return false;
    std::string_view host = t.substr(0, slash);
    std::size_t dot = host.rfind('.');
    if (dot == std::string_view::npos || dot == 0) return false;
    for (char c : host) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
        if (!ok) return false;
    }
    std::string_view tld = host.substr(dot + 1);
    if (tld.size() < 2 || tld.size() > 6) return false;
    for (char c : tld) {
        if (c < 'a' || c > 'z') return false;
    }
    return true;
}

inline std::string strip_token(std::string_view token) {
    std::string out;
    bool hashtag = !token.empty() && token.front() == '#';
    std::size_t i = 0;
    while (i < token.size()) {
        char32_t cp = decode_utf8(token, i);
        if (!is_strippable_cp(cp)) append_utf8(out, cp);
    }
    if (hashtag && !out.empty()) out.insert(out.begin(), '#');
    return out;
}

}  // namespace detail

/// Normalize one text. The stage order is fixed: lowercase → URL removal →
/// whitespace tokenization → punctuation stripping (keeping one token-
/// initial '#') → empty/stop-word removal (hashtags matched un-hashed) →
/// stemming of non-hashtag tokens. Stemmed output is matched against the
/// stop lists once more, since a rewrite may land on a stop word ("cants" →
/// "cant") and stop words must never survive.
inline Document normalize(std::string_view text, const StopLists& stops, Stemmer stemmer) {
    Document doc;
    std::string lowered = ascii_lower(text);

    std::size_t i = 0;
    std::string token;
    const auto flush = [&]() {
        if (token.empty()) return;
        std::string raw;
        raw.swap(token);
        if (detail::looks_like_url(raw)) return;
        std::string stripped = detail::strip_token(raw);
        if (stripped.empty() || stripped == "#") return;
        bool hashtag = stripped.front() == '#';
        std::string word = hashtag ? stripped.substr(1) : stripped;
        if (stops.contains(word)) return;
        if (!hashtag) {
            word = apply_stemmer(stemmer, std::move(word));
            if (stops.contains(word)) return;
            doc.tokens.push_back(std::move(word));
        } else {
            doc.tokens.push_back(stripped);
            doc.hashtags.insert(doc.tokens.back());
        }
    };
    while (i < lowered.size()) {
        std::size_t start = i;
        char32_t cp = decode_utf8(lowered, i);
        if (is_space_cp(cp)) {
            flush();
        } else {
            token.append(lowered, start, i - start);
        }
    }
    flush();
    return doc;
}

inline Document normalize_record(const RawRecord& record, const StopLists& stops, Stemmer stemmer) {
    Document doc = normalize(record.text, stops, stemmer);
    doc.id = record.id;
    doc.label = record.root_category;
    return doc;
}

inline Corpus<Document> normalize_corpus(const Corpus<RawRecord>& corpus, const StopLists& stops,
                                         Stemmer stemmer) {
    Corpus<Document> out;
    out.documents.reserve(corpus.documents.size());
    for (const RawRecord& r : corpus.documents) {
        out.documents.push_back(normalize_record(r, stops, stemmer));
    }
    out.class_counts = corpus.class_counts;
    out.min_class_size = corpus.min_class_size;
    return out;
}

// ---------------------------------------------------------------------------
// vocabulary accounting

/// Distinct whitespace-separated strings in raw text, case-sensitive —
/// the "before" side of the reduction report.
inline std::size_t count_unique_raw(const std::vector<RawRecord>& records) {
    std::unordered_set<std::string> seen;
    for (const RawRecord& r : records) {
        std::size_t i = 0;
        std::string token;
        while (i <= r.text.size()) {
            bool boundary = i == r.text.size();
            char32_t cp = 0;
            std::size_t next = i;
            if (!boundary) {
                cp = decode_utf8(r.text, next);
                boundary = is_space_cp(cp);
            }
            if (boundary) {
                if (!token.empty()) seen.insert(std::move(token)), token.clear();
                if (i == r.text.size()) break;
                i = next;
            } else {
                token.append(r.text, i, next - i);
                i = next;
            }
        }
    }
    return seen.size();
}

inline std::size_t count_unique_tokens(const std::vector<Document>& docs) {
    std::unordered_set<std::string> seen;
    for (const Document& d : docs) {
        for (const std::string& t : d.tokens) seen.insert(t);
    }
    return seen.size();
}

/// (unique words before normalization, unique tokens after).
inline std::pair<std::size_t, std::size_t> vocabulary_reduction_report(
    const Corpus<RawRecord>& before, const Corpus<Document>& after) {
    return {count_unique_raw(before.documents), count_unique_tokens(after.documents)};
}

// ---------------------------------------------------------------------------
// prepared-corpus files

/// Documents serialize to the ingestion JSONL shape — id, space-joined
/// tokens as text, root_category — so prepared corpora re-ingest cleanly
/// (normalization is idempotent). A leading "_meta" line carries counts and
/// the producing run's manifest hash.
inline void save_documents(const std::filesystem::path& path, const std::vector<Document>& docs,
                           const std::string& manifest_hash) {
    std::string out;
    json meta{{"_meta", {{"format", "stx-corpus"}, {"version", 1}, {"documents", docs.size()}}}};
    if (!manifest_hash.empty()) meta["_meta"]["manifest_hash"] = manifest_hash;
    out += dump_line(meta);
    for (const Document& d : docs) {
        std::string text;
        for (std::size_t i = 0; i < d.tokens.size(); ++i) {
            if (i) text += ' ';
            text += d.tokens[i];
        }
        json line{{"id", d.id}, {"text", text}};
        if (d.label) line["root_category"] = *d.label;
        out += dump_line(line);
    }
    atomic_write(path, out);
}

inline void save_corpus(const std::filesystem::path& path, const Corpus<Document>& corpus,
                        const std::string& manifest_hash) {
    save_documents(path, corpus.documents, manifest_hash);
}

inline std::vector<Document> load_documents(const std::filesystem::path& path) {
    std::vector<Document> docs;
    for_each_line(path, [&](std::string_view line) {
        if (trim_spaces(line).empty()) return;
        json j = parse_lenient(line);
        if (j.is_discarded() || !j.is_object()) {
            throw FormatError("bad corpus line in " + path.string());
        }
        if (is_meta_line(j)) return;
        Document d;
        d.id = j.value("id", "");
        std::string text = j.value("text", "");
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t sp = text.find(' ', start);
            std::string tok = text.substr(start, sp == std::string::npos ? sp : sp - start);
            if (!tok.empty()) {
                if (tok.front() == '#') d.hashtags.insert(tok);
                d.tokens.push_back(std::move(tok));
            }
            if (sp == std::string::npos) break;
            start = sp + 1;
        }
        if (auto it = j.find("root_category"); it != j.end() && it->is_string()) {
            d.label = it->get<std::string>();
        }
        docs.push_back(std::move(d));
    });
    return docs;
}

/// Load a labeled corpus file; every document must carry a root_category.
inline Corpus<Document> load_corpus(const std::filesystem::path& path) {
    Corpus<Document> corpus;
    corpus.documents = load_documents(path);
    if (corpus.documents.empty()) throw EmptyCorpusError("empty corpus file: " + path.string());
    for (const Document& d : corpus.documents) {
        if (!d.label) {
            throw FormatError("document '" + d.id + "' in " + path.string() +
                              " lacks a root_category");
        }
    }
    recount_classes(corpus);
    return corpus;
}

}  // namespace stx
