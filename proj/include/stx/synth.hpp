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

// Synthetic corpus generator. Produces a labeled tweet-like corpus with a
// small three-level taxonomy (leaf → mid → root), an unlabeled hashtag
// stream for thesaurus building, and enough surface noise (case, trailing
// punctuation, shared noise words, optional retweets) to exercise the whole
// pipeline. Same seed, same bytes.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "stx/corpus.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"

namespace stx {

struct SynthConfig {
    std::size_t classes = 6;
    std::size_t docs_per_class = 200;
    std::size_t class_vocab = 30;  // distinct content words per class
    std::size_t noise_vocab = 40;  // shared across classes
    double noise_rate = 0.2;       // chance a content slot draws a noise word
    double hashtag_rate = 0.6;     // chance a labeled doc carries its class hashtag
    double retweet_rate = 0.0;
    std::size_t tokens_min = 8;
    std::size_t tokens_max = 14;
    std::size_t unlabeled_docs = 0;
    std::uint64_t seed = 42;
};

struct TaxonomyLine {
    std::string node_id;
    std::vector<std::string> parent_ids;
    std::string name;
};

struct SynthOutput {
    std::vector<RawRecord> labeled;
    std::vector<RawRecord> unlabeled;
    std::vector<TaxonomyLine> taxonomy;
    std::map<std::string, std::string> leaf_to_root;
};

namespace detail {

inline std::string zpad(std::size_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, v);
    return buf;
}

inline std::string synth_class_word(std::size_t cls, std::size_t j) {
    return "c" + std::to_string(cls) + "w" + zpad(j, 2);
}

inline std::string synth_noise_word(std::size_t j) { return "noise" + zpad(j, 2); }

inline std::string synth_hashtag(std::size_t cls) {
    return "#c" + std::to_string(cls) + "tag";
}

// One plausible-looking token: mostly a class word, sometimes noise, with
// occasional capitalization and trailing punctuation.
inline std::string synth_token(std::size_t cls, const SynthConfig& cfg, Rng& rng) {
    std::string w;
    if (rng.uniform() < cfg.noise_rate) {
        w = synth_noise_word(rng.bounded(cfg.noise_vocab));
    } else {
        w = synth_class_word(cls, rng.bounded(cfg.class_vocab));
    }
    if (rng.uniform() < 0.15) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (rng.uniform() < 0.10) {
        static const char tail[3] = {'!', ',', '.'};
        w += tail[rng.bounded(3)];
    }
    return w;
}

inline std::string synth_text(std::size_t cls, const SynthConfig& cfg, Rng& rng,
                              bool force_hashtag) {
    std::size_t span = cfg.tokens_max - cfg.tokens_min + 1;
    std::size_t n = cfg.tokens_min + rng.bounded(span);
    std::string text;
    for (std::size_t t = 0; t < n; ++t) {
        if (!text.empty()) text += ' ';
        text += synth_token(cls, cfg, rng);
    }
    if (force_hashtag || rng.uniform() < cfg.hashtag_rate) {
        text += ' ';
        text += synth_hashtag(cls);
    }
    return text;
}

}  // namespace detail

inline SynthOutput synthesize(const SynthConfig& cfg) {
    if (cfg.classes < 2) throw std::invalid_argument("synthesize: need at least 2 classes");
    if (cfg.docs_per_class == 0) throw std::invalid_argument("synthesize: docs_per_class must be > 0");
    if (cfg.tokens_min == 0 || cfg.tokens_max < cfg.tokens_min) {
        throw std::invalid_argument("synthesize: bad token range");
    }
    if (cfg.class_vocab == 0 || cfg.noise_vocab == 0) {
        throw std::invalid_argument("synthesize: vocab sizes must be > 0");
    }

    SynthOutput out;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        std::string root = "root" + detail::zpad(c, 2);
        std::string mid = "mid" + std::to_string(c);
        std::string leaf = "leaf" + std::to_string(c);
        out.taxonomy.push_back({root, {}, "Category " + std::to_string(c)});
        out.taxonomy.push_back({mid, {root}, ""});
        out.taxonomy.push_back({leaf, {mid}, ""});
        out.leaf_to_root[leaf] = root;
    }

    // Originals seen so far, per class, for retweet targets.
    std::vector<std::vector<std::size_t>> originals(cfg.classes);
    std::size_t total = cfg.classes * cfg.docs_per_class;
    out.labeled.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t cls = i / cfg.docs_per_class;
        Rng rng(derive_seed(cfg.seed, "doc", i));
        RawRecord rec;
        rec.id = "t" + detail::zpad(i, 6);
        rec.label_node = "leaf" + std::to_string(cls);
        rec.source = Source::twitter;
        bool retweet = cfg.retweet_rate > 0.0 && !originals[cls].empty() &&
                       rng.uniform() < cfg.retweet_rate;
        if (retweet) {
            const RawRecord& orig = out.labeled[originals[cls][rng.bounded(originals[cls].size())]];
            rec.text = orig.text;
            rec.retweet_of = orig.id;
        } else {
            rec.text = detail::synth_text(cls, cfg, rng, false);
            originals[cls].push_back(i);
        }
        out.labeled.push_back(std::move(rec));
    }

    out.unlabeled.reserve(cfg.unlabeled_docs);
    for (std::size_t u = 0; u < cfg.unlabeled_docs; ++u) {
        Rng rng(derive_seed(cfg.seed, "unlabeled", u));
        std::size_t cls = rng.bounded(cfg.classes);
        RawRecord rec;
        rec.id = "u" + detail::zpad(u, 6);
        rec.source = Source::twitter;
        rec.text = detail::synth_text(cls, cfg, rng, /*force_hashtag=*/true);
        if (cfg.classes > 1 && rng.uniform() < 0.15) {
            std::size_t other = rng.bounded(cfg.classes - 1);
            if (other >= cls) ++other;
            rec.text += ' ';
            rec.text += detail::synth_hashtag(other);
        }
        out.unlabeled.push_back(std::move(rec));
    }
    return out;
}

inline json record_to_json(const RawRecord& rec) {
    json j = json::object();
    j["id"] = rec.id;
    j["text"] = rec.text;
    if (rec.retweet_of) j["retweet_of"] = *rec.retweet_of;
    if (rec.label_node) j["label_node"] = *rec.label_node;
    return j;
}

inline void write_records(const std::string& path, const std::vector<RawRecord>& records,
                          const std::string& manifest_hash = "") {
    std::string body;
    json meta = json::object();
    meta["_meta"] = json::object();
    meta["_meta"]["format"] = "stx-raw";
    meta["_meta"]["version"] = 1;
    meta["_meta"]["records"] = records.size();
    if (!manifest_hash.empty()) meta["_meta"]["manifest_hash"] = manifest_hash;
    body += dump_line(meta);
    for (const RawRecord& rec : records) body += dump_line(record_to_json(rec));
    atomic_write(path, body);
}

inline void write_taxonomy(const std::string& path, const std::vector<TaxonomyLine>& lines,
                           const std::string& manifest_hash = "") {
    std::string body;
    json meta = json::object();
    meta["_meta"] = json::object();
    meta["_meta"]["format"] = "stx-taxonomy";
    meta["_meta"]["version"] = 1;
    meta["_meta"]["nodes"] = lines.size();
    if (!manifest_hash.empty()) meta["_meta"]["manifest_hash"] = manifest_hash;
    body += dump_line(meta);
    for (const TaxonomyLine& line : lines) {
        json j = json::object();
        j["node_id"] = line.node_id;
        j["parent_ids"] = line.parent_ids;
        if (!line.name.empty()) j["name"] = line.name;
        body += dump_line(j);
    }
    atomic_write(path, body);
}

}  // namespace stx
