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

// stx — command-line surface of the short-text classification toolkit.
//
// Subcommands: prepare, synth, thesaurus, expand, train, evaluate, sweep,
// grid-search. Every run writes a manifest (command, resolved config, input
// hashes, seed) into its output directory and stamps the manifest hash into
// each artifact, so identical manifests mean byte-identical outputs.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 data error.
// Progress and warnings go to stderr; stdout carries one JSON summary line.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stx/stx.hpp"

namespace fs = std::filesystem;
using stx::json;

namespace {

// ---------------------------------------------------------------------------
// config & seed plumbing

// Default seed, overridable by STX_SEED. Precedence overall:
// --seed flag > config file > STX_SEED > 42.
std::uint64_t default_seed() {
    const char* env = std::getenv("STX_SEED");
    if (!env || !*env) return 42;
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0') {
        throw std::invalid_argument("STX_SEED must be an unsigned integer, got '" +
                                    std::string(env) + "'");
    }
    return static_cast<std::uint64_t>(v);
}

json load_config_file(const std::string& path) {
    json j = stx::parse_lenient(stx::read_file(path));
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("config file is not a JSON object: " + path);
    }
    return j;
}

// Config-file value applies only when the flag was not given on the command
// line: flags > file > defaults.
template <class T>
void cfg_get(const json& cfg, CLI::App* cmd, const std::string& flag, const char* key, T& var) {
    if (cmd->count(flag) > 0) return;
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        var = it->get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
    }
}

std::map<std::string, double> parse_class_weights(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const std::string& kv : kvs) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= kv.size()) {
            throw std::invalid_argument("--class-weight expects CATEGORY=WEIGHT, got '" + kv + "'");
        }
        std::string num = kv.substr(eq + 1);
        std::size_t used = 0;
        double w = 0.0;
        try {
            w = std::stod(num, &used);
        } catch (...) {
            used = 0;
        }
        if (used != num.size()) {
            throw std::invalid_argument("bad weight in --class-weight '" + kv + "'");
        }
        out[kv.substr(0, eq)] = w;
    }
    return out;
}

stx::Source source_from_string(const std::string& s) {
    if (s == "twitter") return stx::Source::twitter;
    if (s == "amazon") return stx::Source::amazon;
    throw std::invalid_argument("unknown source: " + s);
}

stx::StopLists load_stops(const std::string& general, const std::string& platform) {
    stx::StopLists s = stx::StopLists::builtin();
    if (!general.empty()) s.general = stx::StopLists::load_list(general);
    if (!platform.empty()) s.platform = stx::StopLists::load_list(platform);
    return s;
}

stx::Manifest make_manifest(std::string command, json config,
                            const std::vector<std::string>& input_paths, std::uint64_t seed) {
    stx::Manifest m;
    m.command = std::move(command);
    m.config = std::move(config);
    m.seed = seed;
    for (const std::string& p : input_paths) {
        if (!p.empty()) m.inputs[p] = stx::hex64(stx::hash_file(p));
    }
    return m;
}

fs::path prep_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw stx::IoError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

void emit(const json& summary) { std::printf("%s\n", summary.dump().c_str()); }

// ---------------------------------------------------------------------------
// shared option bundles

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its values");
    cmd->add_option("--out", o.out_dir, "output directory")->required();
    cmd->add_option("--seed", o.seed, "run seed")->capture_default_str();
}

json merge_common(CLI::App* cmd, CommonOpts& o) {
    json cfg = o.config_path.empty() ? json::object() : load_config_file(o.config_path);
    cfg_get(cfg, cmd, "--seed", "seed", o.seed);
    return cfg;
}

struct PipelineOpts {
    std::string corpus;
    std::string stop_general, stop_twitter;
    int ngram_max = 1;
    std::uint32_t min_df = 1;
    double keep_fraction = 1.0;
    std::string learner = "svm";
    double C = 1.0;
    std::size_t epochs = 30;
    double alpha = 1.0;
    std::vector<std::string> class_weight_kvs;
    std::map<std::string, double> class_weights;  // resolved
    bool nb_counts = false;
    std::string expand_thesaurus;
    bool expand_category = false;
    std::size_t expand_n = 0;
    std::string expand_side = "document";
    std::string category_weighting = "tfidf";
    std::size_t category_depth = 50;
};

void add_pipeline_flags(CLI::App* cmd, PipelineOpts& o) {
    cmd->add_option("--corpus", o.corpus, "prepared labeled corpus (JSONL)");
    cmd->add_option("--stop-general", o.stop_general, "general stop-word list (default: builtin)");
    cmd->add_option("--stop-twitter", o.stop_twitter, "platform stop-word list (default: builtin)");
    cmd->add_option("--ngram-max", o.ngram_max, "1 = unigrams, 2 = +bigrams")->capture_default_str();
    cmd->add_option("--min-df", o.min_df, "minimum document frequency")->capture_default_str();
    cmd->add_option("--keep-fraction", o.keep_fraction, "fraction of features kept by F-score")
        ->capture_default_str();
    cmd->add_option("--learner", o.learner, "nb | logreg | svm")->capture_default_str();
    cmd->add_option("--C", o.C, "loss/regularization trade-off")->capture_default_str();
    cmd->add_option("--epochs", o.epochs, "SGD epochs")->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "NB smoothing")->capture_default_str();
    cmd->add_option("--class-weight", o.class_weight_kvs,
                    "per-class loss weight, CATEGORY=WEIGHT (repeatable)");
    cmd->add_flag("--nb-counts", o.nb_counts, "feed NB raw term counts instead of TF-IDF");
    cmd->add_option("--expand-thesaurus", o.expand_thesaurus, "thesaurus file for expansion");
    cmd->add_flag("--expand-category", o.expand_category,
                  "build a category thesaurus from each training split");
    cmd->add_option("--expand-n", o.expand_n, "words appended per key")->capture_default_str();
    cmd->add_option("--expand-side", o.expand_side, "document | query | both")
        ->capture_default_str();
    cmd->add_option("--category-weighting", o.category_weighting, "frequency | tfidf")
        ->capture_default_str();
    cmd->add_option("--category-depth", o.category_depth, "category thesaurus depth")
        ->capture_default_str();
}

void merge_pipeline_cfg(const json& cfg, CLI::App* cmd, PipelineOpts& o) {
    cfg_get(cfg, cmd, "--corpus", "corpus", o.corpus);
    cfg_get(cfg, cmd, "--stop-general", "stop_general", o.stop_general);
    cfg_get(cfg, cmd, "--stop-twitter", "stop_twitter", o.stop_twitter);
    cfg_get(cfg, cmd, "--ngram-max", "ngram_max", o.ngram_max);
    cfg_get(cfg, cmd, "--min-df", "min_df", o.min_df);
    cfg_get(cfg, cmd, "--keep-fraction", "keep_fraction", o.keep_fraction);
    cfg_get(cfg, cmd, "--learner", "learner", o.learner);
    cfg_get(cfg, cmd, "--C", "C", o.C);
    cfg_get(cfg, cmd, "--epochs", "epochs", o.epochs);
    cfg_get(cfg, cmd, "--alpha", "alpha", o.alpha);
    cfg_get(cfg, cmd, "--nb-counts", "nb_counts", o.nb_counts);
    cfg_get(cfg, cmd, "--expand-thesaurus", "expand_thesaurus", o.expand_thesaurus);
    cfg_get(cfg, cmd, "--expand-category", "expand_category", o.expand_category);
    cfg_get(cfg, cmd, "--expand-n", "expand_n", o.expand_n);
    cfg_get(cfg, cmd, "--expand-side", "expand_side", o.expand_side);
    cfg_get(cfg, cmd, "--category-weighting", "category_weighting", o.category_weighting);
    cfg_get(cfg, cmd, "--category-depth", "category_depth", o.category_depth);
    if (cmd->count("--class-weight") == 0 && cfg.contains("class_weights")) {
        try {
            o.class_weights = cfg.at("class_weights").get<std::map<std::string, double>>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config key 'class_weights' must map categories to numbers");
        }
    } else {
        o.class_weights = parse_class_weights(o.class_weight_kvs);
    }
    if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
}

json pipeline_config_json(const PipelineOpts& o) {
    json cw = json::object();
    for (const auto& [c, w] : o.class_weights) cw[c] = w;
    return json{{"corpus", o.corpus},
                {"stop_general", o.stop_general},
                {"stop_twitter", o.stop_twitter},
                {"ngram_max", o.ngram_max},
                {"min_df", o.min_df},
                {"keep_fraction", o.keep_fraction},
                {"learner", o.learner},
                {"C", o.C},
                {"epochs", o.epochs},
                {"alpha", o.alpha},
                {"class_weights", cw},
                {"nb_counts", o.nb_counts},
                {"expand_thesaurus", o.expand_thesaurus},
                {"expand_category", o.expand_category},
                {"expand_n", o.expand_n},
                {"expand_side", o.expand_side},
                {"category_weighting", o.category_weighting},
                {"category_depth", o.category_depth}};
}

stx::PipelineConfig make_pipeline_config(const PipelineOpts& o) {
    stx::PipelineConfig pc;
    pc.ngram_max = o.ngram_max;
    pc.min_df = o.min_df;
    pc.keep_fraction = o.keep_fraction;
    pc.learner = stx::learner_from_string(o.learner);
    pc.learner_config.C = o.C;
    pc.learner_config.epochs = o.epochs;
    pc.learner_config.alpha = o.alpha;
    pc.learner_config.class_weights = o.class_weights;
    pc.nb_counts = o.nb_counts;
    pc.stops = load_stops(o.stop_general, o.stop_twitter);
    if (!o.expand_thesaurus.empty() || o.expand_category) {
        pc.expansion.enabled = true;
        pc.expansion.side = stx::side_from_string(o.expand_side);
        pc.expansion.n = o.expand_n;
        if (!o.expand_thesaurus.empty()) {
            pc.expansion.hashtag = stx::load_thesaurus(o.expand_thesaurus);
        }
        pc.expansion.category = o.expand_category;
        pc.expansion.category_weighting = stx::weighting_from_string(o.category_weighting);
        pc.expansion.category_max_depth = o.category_depth;
    }
    return pc;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
    CommonOpts common;
    stx::SynthConfig gen;
};

void run_synth(CLI::App* cmd, SynthOpts& o) {
    json cfg = merge_common(cmd, o.common);
    cfg_get(cfg, cmd, "--classes", "classes", o.gen.classes);
    cfg_get(cfg, cmd, "--docs-per-class", "docs_per_class", o.gen.docs_per_class);
    cfg_get(cfg, cmd, "--class-vocab", "class_vocab", o.gen.class_vocab);
    cfg_get(cfg, cmd, "--noise-vocab", "noise_vocab", o.gen.noise_vocab);
    cfg_get(cfg, cmd, "--noise-rate", "noise_rate", o.gen.noise_rate);
    cfg_get(cfg, cmd, "--hashtag-rate", "hashtag_rate", o.gen.hashtag_rate);
    cfg_get(cfg, cmd, "--retweet-rate", "retweet_rate", o.gen.retweet_rate);
    cfg_get(cfg, cmd, "--tokens-min", "tokens_min", o.gen.tokens_min);
    cfg_get(cfg, cmd, "--tokens-max", "tokens_max", o.gen.tokens_max);
    cfg_get(cfg, cmd, "--unlabeled", "unlabeled", o.gen.unlabeled_docs);
    o.gen.seed = o.common.seed;
    for (double rate : {o.gen.noise_rate, o.gen.hashtag_rate, o.gen.retweet_rate}) {
        if (!(rate >= 0.0 && rate <= 1.0)) {
            throw std::invalid_argument("rates must lie in [0, 1]");
        }
    }

    json config{{"classes", o.gen.classes},
                {"docs_per_class", o.gen.docs_per_class},
                {"class_vocab", o.gen.class_vocab},
                {"noise_vocab", o.gen.noise_vocab},
                {"noise_rate", o.gen.noise_rate},
                {"hashtag_rate", o.gen.hashtag_rate},
                {"retweet_rate", o.gen.retweet_rate},
                {"tokens_min", o.gen.tokens_min},
                {"tokens_max", o.gen.tokens_max},
                {"unlabeled", o.gen.unlabeled_docs}};
    stx::Manifest m = make_manifest("synth", config, {}, o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    stx::SynthOutput syn = stx::synthesize(o.gen);
    stx::write_records((dir / "corpus.jsonl").string(), syn.labeled, hash);
    stx::write_taxonomy((dir / "taxonomy.jsonl").string(), syn.taxonomy, hash);
    if (!syn.unlabeled.empty()) {
        stx::write_records((dir / "unlabeled.jsonl").string(), syn.unlabeled, hash);
    }
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"labeled", syn.labeled.size()},
              {"unlabeled", syn.unlabeled.size()},
              {"classes", o.gen.classes},
              {"out", dir.string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOpts {
    CommonOpts common;
    std::string corpus, taxonomy;
    std::string source = "twitter";
    std::size_t min_class_size = 1;
    std::string stop_general, stop_twitter;
    std::string stemmer = "suffix";
};

void run_prepare(CLI::App* cmd, PrepareOpts& o) {
    json cfg = merge_common(cmd, o.common);
    cfg_get(cfg, cmd, "--corpus", "corpus", o.corpus);
    cfg_get(cfg, cmd, "--taxonomy", "taxonomy", o.taxonomy);
    cfg_get(cfg, cmd, "--source", "source", o.source);
    cfg_get(cfg, cmd, "--min-class-size", "min_class_size", o.min_class_size);
    cfg_get(cfg, cmd, "--stop-general", "stop_general", o.stop_general);
    cfg_get(cfg, cmd, "--stop-twitter", "stop_twitter", o.stop_twitter);
    cfg_get(cfg, cmd, "--stemmer", "stemmer", o.stemmer);
    if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
    if (o.taxonomy.empty()) throw std::invalid_argument("--taxonomy is required");

    stx::Source source = source_from_string(o.source);
    stx::Stemmer stemmer = stx::stemmer_from_string(o.stemmer);
    stx::StopLists stops = load_stops(o.stop_general, o.stop_twitter);

    json config{{"corpus", o.corpus},        {"taxonomy", o.taxonomy},
                {"source", o.source},        {"min_class_size", o.min_class_size},
                {"stop_general", o.stop_general}, {"stop_twitter", o.stop_twitter},
                {"stemmer", o.stemmer}};
    stx::Manifest m = make_manifest("prepare", config,
                                    {o.corpus, o.taxonomy, o.stop_general, o.stop_twitter},
                                    o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    stx::IngestResult in = stx::ingest(o.corpus, source);
    std::fprintf(stderr, "ingest: %zu records read, %zu skipped\n", in.read, in.skipped);
    stx::TaxonomyGraph graph = stx::load_taxonomy(o.taxonomy);
    for (const std::string& w : graph.load_warnings) std::fprintf(stderr, "taxonomy: %s\n", w.c_str());

    std::vector<std::string> nodes;
    std::set<std::string> seen;
    for (const stx::RawRecord& rec : in.records) {
        if (rec.label_node && seen.insert(*rec.label_node).second) nodes.push_back(*rec.label_node);
    }
    stx::ResolutionReport rr = stx::resolve_all(graph, nodes, o.common.seed);
    for (const auto& [node, msg] : rr.errors) {
        std::fprintf(stderr, "resolve: %s: %s\n", node.c_str(), msg.c_str());
    }
    json rrj = stx::resolution_report_to_json(rr);
    rrj["manifest_hash"] = hash;
    stx::atomic_write(dir / "resolution_report.json", rrj.dump(2) + "\n");

    // records naming unresolvable nodes are reported above, then dropped
    std::vector<stx::RawRecord> usable;
    usable.reserve(in.records.size());
    std::size_t unresolved = 0;
    for (const stx::RawRecord& rec : in.records) {
        if (rec.label_node && rr.resolved.find(*rec.label_node) == rr.resolved.end()) {
            ++unresolved;
            continue;
        }
        usable.push_back(rec);
    }
    if (unresolved > 0) {
        std::fprintf(stderr, "dropped %zu record(s) with unresolvable label nodes\n", unresolved);
    }

    stx::FilterStats fstats;
    stx::Corpus<stx::RawRecord> filtered =
        stx::filter_corpus(usable, rr.resolved, o.min_class_size, &fstats);
    std::fprintf(stderr, "filter: %zu retweets, %zu unlabeled, %zu rare-class removed\n",
                 fstats.retweets_removed, fstats.unlabeled_removed, fstats.rare_class_removed);
    stx::Corpus<stx::Document> normalized = stx::normalize_corpus(filtered, stops, stemmer);
    auto [raw_vocab, norm_vocab] = stx::vocabulary_reduction_report(filtered, normalized);
    std::fprintf(stderr, "vocabulary: %zu raw words -> %zu tokens\n", raw_vocab, norm_vocab);

    stx::save_corpus(dir / "corpus.jsonl", normalized, hash);

    // class distribution: count + the three most frequent non-hashtag tokens
    std::map<std::string, std::map<std::string, std::uint64_t>> freq;
    for (const stx::Document& d : normalized.documents) {
        for (const std::string& t : d.tokens) {
            if (!t.empty() && t.front() == '#') continue;
            ++freq[*d.label][t];
        }
    }
    std::string csv = "# manifest: " + hash + "\n";
    csv += "category,count,top_keywords\n";
    for (const auto& [cls, n] : normalized.class_counts) {
        std::vector<std::pair<std::string, std::uint64_t>> words(freq[cls].begin(), freq[cls].end());
        std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::string keywords;
        for (std::size_t i = 0; i < words.size() && i < 3; ++i) {
            if (i) keywords += ' ';
            keywords += words[i].first;
        }
        csv += stx::detail::csv_escape(cls) + ',' + std::to_string(n) + ',' +
               stx::detail::csv_escape(keywords) + '\n';
    }
    stx::atomic_write(dir / "class_distribution.csv", csv);
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"documents", normalized.documents.size()},
              {"classes", normalized.class_counts.size()},
              {"raw_vocabulary", raw_vocab},
              {"normalized_vocabulary", norm_vocab},
              {"corpus", (dir / "corpus.jsonl").string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// thesaurus

struct ThesaurusOpts {
    CommonOpts common;
    std::string kind;
    std::string corpus;
    std::size_t max_depth = 50;
    std::uint64_t min_support = 2;
    std::string weighting = "tfidf";
    std::string stop_general, stop_twitter;
    std::string stemmer = "suffix";
    std::string source = "twitter";
};

void run_thesaurus(CLI::App* cmd, ThesaurusOpts& o) {
    json cfg = merge_common(cmd, o.common);
    cfg_get(cfg, cmd, "--kind", "kind", o.kind);
    cfg_get(cfg, cmd, "--corpus", "corpus", o.corpus);
    cfg_get(cfg, cmd, "--max-depth", "max_depth", o.max_depth);
    cfg_get(cfg, cmd, "--min-support", "min_support", o.min_support);
    cfg_get(cfg, cmd, "--weighting", "weighting", o.weighting);
    cfg_get(cfg, cmd, "--stop-general", "stop_general", o.stop_general);
    cfg_get(cfg, cmd, "--stop-twitter", "stop_twitter", o.stop_twitter);
    cfg_get(cfg, cmd, "--stemmer", "stemmer", o.stemmer);
    cfg_get(cfg, cmd, "--source", "source", o.source);
    if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
    if (o.kind != "hashtag" && o.kind != "category") {
        throw std::invalid_argument("--kind must be 'hashtag' or 'category'");
    }

    stx::StopLists stops = load_stops(o.stop_general, o.stop_twitter);
    json config{{"kind", o.kind},
                {"corpus", o.corpus},
                {"max_depth", o.max_depth},
                {"min_support", o.min_support},
                {"weighting", o.weighting},
                {"stop_general", o.stop_general},
                {"stop_twitter", o.stop_twitter},
                {"stemmer", o.stemmer},
                {"source", o.source}};
    stx::Manifest m = make_manifest("thesaurus", config,
                                    {o.corpus, o.stop_general, o.stop_twitter}, o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    std::string built_from =
        "corpus:" + stx::hex64(stx::hash_file(o.corpus)) + "|stops:" + stx::hex64(stops.hash());
    stx::Thesaurus th;
    std::vector<std::string> warnings;
    if (o.kind == "hashtag") {
        stx::IngestResult in = stx::ingest(o.corpus, source_from_string(o.source));
        std::fprintf(stderr, "ingest: %zu records read, %zu skipped\n", in.read, in.skipped);
        stx::Stemmer stemmer = stx::stemmer_from_string(o.stemmer);
        std::vector<stx::Document> docs;
        docs.reserve(in.records.size());
        for (const stx::RawRecord& rec : in.records) {
            docs.push_back(stx::normalize_record(rec, stops, stemmer));
        }
        th = stx::build_hashtag_thesaurus(docs, stops, o.max_depth, o.min_support, built_from);
    } else {
        stx::Corpus<stx::Document> corpus = stx::load_corpus(o.corpus);
        th = stx::build_category_thesaurus(corpus, stx::weighting_from_string(o.weighting),
                                           o.max_depth, stops, built_from, &warnings);
    }
    for (const std::string& w : warnings) std::fprintf(stderr, "thesaurus: %s\n", w.c_str());

    stx::save_thesaurus(dir / "thesaurus.json", th, hash);
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"kind", o.kind},
              {"keys", th.entries.size()},
              {"thesaurus", (dir / "thesaurus.json").string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// expand

struct ExpandOpts {
    CommonOpts common;
    std::string corpus, thesaurus;
    std::size_t n = 2;
    std::string side = "document";
    std::string role = "training";
};

void run_expand(CLI::App* cmd, ExpandOpts& o) {
    json cfg = merge_common(cmd, o.common);
    cfg_get(cfg, cmd, "--corpus", "corpus", o.corpus);
    cfg_get(cfg, cmd, "--thesaurus", "thesaurus", o.thesaurus);
    cfg_get(cfg, cmd, "--n", "n", o.n);
    cfg_get(cfg, cmd, "--side", "side", o.side);
    cfg_get(cfg, cmd, "--role", "role", o.role);
    if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
    if (o.thesaurus.empty()) throw std::invalid_argument("--thesaurus is required");
    stx::SplitRole role;
    if (o.role == "training") role = stx::SplitRole::training;
    else if (o.role == "testing") role = stx::SplitRole::testing;
    else throw std::invalid_argument("--role must be 'training' or 'testing'");

    json config{{"corpus", o.corpus},
                {"thesaurus", o.thesaurus},
                {"n", o.n},
                {"side", o.side},
                {"role", o.role}};
    stx::Manifest m = make_manifest("expand", config, {o.corpus, o.thesaurus}, o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    std::vector<stx::Document> docs = stx::load_documents(o.corpus);
    stx::Thesaurus th = stx::load_thesaurus(o.thesaurus);
    stx::ExpansionConfig ec{o.n, stx::derive_seed(o.common.seed, "expand"),
                            stx::side_from_string(o.side)};
    stx::ExpansionStats stats = stx::expand_corpus(docs, th, ec, role);

    stx::save_documents(dir / "corpus.jsonl", docs, hash);
    json stats_json{{"documents_touched", stats.documents_touched},
                    {"words_added", stats.words_added},
                    {"manifest_hash", hash}};
    stx::atomic_write(dir / "stats.json", stats_json.dump(2) + "\n");
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"documents_touched", stats.documents_touched},
              {"words_added", stats.words_added},
              {"corpus", (dir / "corpus.jsonl").string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    CommonOpts common;
    PipelineOpts pipe;
};

void run_train(CLI::App* cmd, TrainOpts& o) {
    json cfg = merge_common(cmd, o.common);
    merge_pipeline_cfg(cfg, cmd, o.pipe);

    json config = pipeline_config_json(o.pipe);
    stx::Manifest m = make_manifest(
        "train", config,
        {o.pipe.corpus, o.pipe.stop_general, o.pipe.stop_twitter, o.pipe.expand_thesaurus},
        o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    stx::Corpus<stx::Document> corpus = stx::load_corpus(o.pipe.corpus);
    stx::PipelineConfig pc = make_pipeline_config(o.pipe);
    stx::FittedPipeline fitted = stx::fit_pipeline(corpus, pc, o.common.seed);

    stx::save_model(dir / "model.json", fitted.model, hash);
    json vj{{"vocabulary", stx::vocabulary_to_json(fitted.vocab)},
            {"kept_columns", fitted.mask.kept_columns},
            {"keep_fraction", fitted.mask.keep_fraction},
            {"manifest_hash", hash}};
    stx::atomic_write(dir / "vocabulary.json", vj.dump(2) + "\n");
    if (fitted.category_thesaurus) {
        stx::save_thesaurus(dir / "category_thesaurus.json", *fitted.category_thesaurus, hash);
    }
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"classes", fitted.model.classes.size()},
              {"features_total", fitted.vocab.size()},
              {"features_kept", fitted.mask.kept_columns.size()},
              {"model", (dir / "model.json").string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalOpts {
    CommonOpts common;
    PipelineOpts pipe;
    std::size_t k = 5;
    std::string format = "both";
};

void add_eval_flags(CLI::App* cmd, EvalOpts& o) {
    add_common(cmd, o.common);
    add_pipeline_flags(cmd, o.pipe);
    cmd->add_option("--k", o.k, "cross-validation folds")->capture_default_str();
    cmd->add_option("--format", o.format, "json | csv | both")->capture_default_str();
}

json merge_eval_cfg(CLI::App* cmd, EvalOpts& o) {
    json cfg = merge_common(cmd, o.common);
    merge_pipeline_cfg(cfg, cmd, o.pipe);
    cfg_get(cfg, cmd, "--k", "k", o.k);
    cfg_get(cfg, cmd, "--format", "format", o.format);
    if (o.format != "json" && o.format != "csv" && o.format != "both") {
        throw std::invalid_argument("--format must be json, csv or both");
    }
    return cfg;
}

void run_evaluate(CLI::App* cmd, EvalOpts& o) {
    merge_eval_cfg(cmd, o);

    json config = pipeline_config_json(o.pipe);
    config["k"] = o.k;
    config["format"] = o.format;
    stx::Manifest m = make_manifest(
        "evaluate", config,
        {o.pipe.corpus, o.pipe.stop_general, o.pipe.stop_twitter, o.pipe.expand_thesaurus},
        o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    stx::Corpus<stx::Document> corpus = stx::load_corpus(o.pipe.corpus);
    stx::PipelineConfig pc = make_pipeline_config(o.pipe);
    stx::CvResult cv = stx::cross_validate(corpus, pc, o.k, o.common.seed);
    cv.mean.config = config;

    if (o.format == "json" || o.format == "both") {
        json folds = json::array();
        for (const stx::MetricsReport& r : cv.folds) folds.push_back(stx::report_to_json(r));
        json mj{{"mean", stx::report_to_json(cv.mean)},
                {"folds", folds},
                {"manifest_hash", hash}};
        stx::atomic_write(dir / "metrics.json", mj.dump(2) + "\n");
    }
    if (o.format == "csv" || o.format == "both") {
        stx::atomic_write(dir / "metrics.csv", stx::report_to_csv(cv.mean, hash));
    }
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"macro_f1", cv.mean.macro.f1},
              {"macro_precision", cv.mean.macro.precision},
              {"macro_recall", cv.mean.macro.recall},
              {"micro_f1", cv.mean.micro.f1},
              {"folds", o.k},
              {"out", dir.string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
    EvalOpts eval;
    std::string axis;
    std::string values;  // comma-separated
    std::string weight_target;
};

std::vector<std::pair<std::string, double>> parse_value_list(const std::string& list) {
    std::vector<std::pair<std::string, double>> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        std::string tok = list.substr(start, comma == std::string::npos ? comma : comma - start);
        std::string trimmed(stx::trim_spaces(tok));
        if (!trimmed.empty()) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(trimmed, &used);
            } catch (...) {
                used = 0;
            }
            if (used != trimmed.size()) {
                throw std::invalid_argument("--values: '" + trimmed + "' is not a number");
            }
            out.emplace_back(trimmed, v);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("--values must list at least one number");
    return out;
}

void run_sweep(CLI::App* cmd, SweepOpts& o) {
    json cfg = merge_eval_cfg(cmd, o.eval);
    cfg_get(cfg, cmd, "--axis", "axis", o.axis);
    cfg_get(cfg, cmd, "--values", "values", o.values);
    cfg_get(cfg, cmd, "--weight-target", "weight_target", o.weight_target);
    if (o.axis.empty()) throw std::invalid_argument("--axis is required");
    if (o.values.empty()) throw std::invalid_argument("--values is required");
    auto values = parse_value_list(o.values);

    json config = pipeline_config_json(o.eval.pipe);
    config["k"] = o.eval.k;
    config["axis"] = o.axis;
    config["values"] = o.values;
    config["weight_target"] = o.weight_target;
    stx::Manifest m = make_manifest("sweep", config,
                                    {o.eval.pipe.corpus, o.eval.pipe.stop_general,
                                     o.eval.pipe.stop_twitter, o.eval.pipe.expand_thesaurus},
                                    o.eval.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.eval.common.out_dir);

    stx::Corpus<stx::Document> corpus = stx::load_corpus(o.eval.pipe.corpus);
    stx::PipelineConfig base = make_pipeline_config(o.eval.pipe);

    std::string csv = "# manifest: " + hash + "\n";
    csv += "value,macro_f1,macro_precision,macro_recall\n";
    for (const auto& [token, v] : values) {
        stx::PipelineConfig pc = base;
        if (o.axis == "keep_fraction") {
            pc.keep_fraction = v;
        } else if (o.axis == "expansion_n") {
            if (!pc.expansion.enabled) {
                throw std::invalid_argument(
                    "axis expansion_n needs --expand-thesaurus or --expand-category");
            }
            double rounded = std::floor(v + 0.5);
            if (v < 0.0 || std::abs(v - rounded) > 1e-9) {
                throw std::invalid_argument("expansion_n values must be non-negative integers");
            }
            pc.expansion.n = static_cast<std::size_t>(rounded);
        } else if (o.axis == "class_weight") {
            if (o.weight_target.empty()) {
                throw std::invalid_argument("axis class_weight needs --weight-target CATEGORY");
            }
            pc.learner_config.class_weights[o.weight_target] = v;
        } else if (o.axis == "C") {
            pc.learner_config.C = v;
        } else {
            throw std::invalid_argument("unknown sweep axis: " + o.axis);
        }
        stx::CvResult cv = stx::cross_validate(corpus, pc, o.eval.k, o.eval.common.seed);
        csv += token + ',' + stx::detail::fmt4(cv.mean.macro.f1) + ',' +
               stx::detail::fmt4(cv.mean.macro.precision) + ',' +
               stx::detail::fmt4(cv.mean.macro.recall) + '\n';
        std::fprintf(stderr, "sweep %s=%s: macro-F1 %.4f\n", o.axis.c_str(), token.c_str(),
                     cv.mean.macro.f1);
    }
    stx::atomic_write(dir / "sweep.csv", csv);
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"axis", o.axis},
              {"rows", values.size()},
              {"csv", (dir / "sweep.csv").string()},
              {"manifest_hash", hash}});
}

// ---------------------------------------------------------------------------
// grid-search

struct GridOpts {
    CommonOpts common;
    std::string corpus;
    std::string values;
    std::size_t k = 5;
    std::string learner = "svm";
    int ngram_max = 1;
    std::uint32_t min_df = 1;
    double keep_fraction = 1.0;
    std::size_t epochs = 30;
    std::vector<std::string> class_weight_kvs;
    std::map<std::string, double> class_weights;
};

void run_grid(CLI::App* cmd, GridOpts& o) {
    json cfg = merge_common(cmd, o.common);
    cfg_get(cfg, cmd, "--corpus", "corpus", o.corpus);
    cfg_get(cfg, cmd, "--values", "values", o.values);
    cfg_get(cfg, cmd, "--k", "k", o.k);
    cfg_get(cfg, cmd, "--learner", "learner", o.learner);
    cfg_get(cfg, cmd, "--ngram-max", "ngram_max", o.ngram_max);
    cfg_get(cfg, cmd, "--min-df", "min_df", o.min_df);
    cfg_get(cfg, cmd, "--keep-fraction", "keep_fraction", o.keep_fraction);
    cfg_get(cfg, cmd, "--epochs", "epochs", o.epochs);
    if (cmd->count("--class-weight") == 0 && cfg.contains("class_weights")) {
        o.class_weights = cfg.at("class_weights").get<std::map<std::string, double>>();
    } else {
        o.class_weights = parse_class_weights(o.class_weight_kvs);
    }
    if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
    if (o.values.empty()) throw std::invalid_argument("--values is required");
    stx::LearnerKind kind = stx::learner_from_string(o.learner);
    if (kind == stx::LearnerKind::nb) {
        throw std::invalid_argument("grid-search tunes C for linear learners (logreg, svm)");
    }
    std::vector<double> candidates;
    for (const auto& [tok, v] : parse_value_list(o.values)) {
        (void)tok;
        candidates.push_back(v);
    }

    json cw = json::object();
    for (const auto& [c, w] : o.class_weights) cw[c] = w;
    json config{{"corpus", o.corpus},   {"values", o.values},
                {"k", o.k},             {"learner", o.learner},
                {"ngram_max", o.ngram_max}, {"min_df", o.min_df},
                {"keep_fraction", o.keep_fraction}, {"epochs", o.epochs},
                {"class_weights", cw}};
    stx::Manifest m = make_manifest("grid-search", config, {o.corpus}, o.common.seed);
    std::string hash = stx::manifest_hash_of(m);
    fs::path dir = prep_out_dir(o.common.out_dir);

    stx::Corpus<stx::Document> corpus = stx::load_corpus(o.corpus);
    std::vector<std::string> y;
    y.reserve(corpus.documents.size());
    for (const stx::Document& d : corpus.documents) y.push_back(*d.label);
    stx::Vocabulary vocab = stx::build_vocabulary(corpus.documents, o.ngram_max, o.min_df);
    stx::SparseMatrix X = stx::tfidf(corpus.documents, vocab);
    if (o.keep_fraction < 1.0) {
        X = stx::apply_mask(X, stx::select_top(stx::anova_f(X, y), o.keep_fraction));
    }

    stx::LearnerConfig base;
    base.epochs = o.epochs;
    base.class_weights = o.class_weights;
    stx::GridSearchResult gr =
        stx::grid_search_C(X, y, candidates, o.k, o.common.seed, kind, base);

    json gj{{"candidates", gr.candidates},
            {"mean_scores", gr.mean_scores},
            {"chosen", gr.chosen},
            {"manifest_hash", hash}};
    stx::atomic_write(dir / "grid.json", gj.dump(2) + "\n");
    stx::write_manifest((dir / "manifest.json").string(), m);
    emit(json{{"chosen", gr.chosen},
              {"candidates", gr.candidates.size()},
              {"grid", (dir / "grid.json").string()},
              {"manifest_hash", hash}});
}

int exit_code_for(const stx::Error& e) {
    if (dynamic_cast<const stx::DivergedError*>(&e)) return 1;
    if (dynamic_cast<const stx::IoError*>(&e) || dynamic_cast<const stx::FormatError*>(&e) ||
        dynamic_cast<const stx::EmptyCorpusError*>(&e) ||
        dynamic_cast<const stx::StratificationError*>(&e) ||
        dynamic_cast<const stx::UnknownNodeError*>(&e) ||
        dynamic_cast<const stx::CycleError*>(&e) ||
        dynamic_cast<const stx::MalformedTaxonomyError*>(&e) ||
        dynamic_cast<const stx::EmptyVocabularyError*>(&e) ||
        dynamic_cast<const stx::DegenerateLabelsError*>(&e)) {
        return 3;
    }
    return 1;  // wrapped fold errors and anything else count as runtime failures
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"short-text classification toolkit"};
    app.set_version_flag("--version", "stx 0.1.0");
    app.require_subcommand(1);

    SynthOpts synth_opts;
    PrepareOpts prepare_opts;
    ThesaurusOpts thesaurus_opts;
    ExpandOpts expand_opts;
    TrainOpts train_opts;
    EvalOpts eval_opts;
    SweepOpts sweep_opts;
    GridOpts grid_opts;

    try {
        std::uint64_t seed0 = default_seed();
        synth_opts.common.seed = seed0;
        prepare_opts.common.seed = seed0;
        thesaurus_opts.common.seed = seed0;
        expand_opts.common.seed = seed0;
        train_opts.common.seed = seed0;
        eval_opts.common.seed = seed0;
        sweep_opts.eval.common.seed = seed0;
        grid_opts.common.seed = seed0;

        CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
        add_common(synth, synth_opts.common);
        synth->add_option("--classes", synth_opts.gen.classes)->capture_default_str();
        synth->add_option("--docs-per-class", synth_opts.gen.docs_per_class)->capture_default_str();
        synth->add_option("--class-vocab", synth_opts.gen.class_vocab)->capture_default_str();
        synth->add_option("--noise-vocab", synth_opts.gen.noise_vocab)->capture_default_str();
        synth->add_option("--noise-rate", synth_opts.gen.noise_rate)->capture_default_str();
        synth->add_option("--hashtag-rate", synth_opts.gen.hashtag_rate)->capture_default_str();
        synth->add_option("--retweet-rate", synth_opts.gen.retweet_rate)->capture_default_str();
        synth->add_option("--tokens-min", synth_opts.gen.tokens_min)->capture_default_str();
        synth->add_option("--tokens-max", synth_opts.gen.tokens_max)->capture_default_str();
        synth->add_option("--unlabeled", synth_opts.gen.unlabeled_docs,
                          "extra unlabeled hashtag docs")->capture_default_str();
        synth->callback([&]() { run_synth(synth, synth_opts); });

        CLI::App* prepare =
            app.add_subcommand("prepare", "ingest, label, filter and normalize a corpus");
        add_common(prepare, prepare_opts.common);
        prepare->add_option("--corpus", prepare_opts.corpus, "raw JSONL records");
        prepare->add_option("--taxonomy", prepare_opts.taxonomy, "taxonomy JSONL");
        prepare->add_option("--source", prepare_opts.source, "twitter | amazon")
            ->capture_default_str();
        prepare->add_option("--min-class-size", prepare_opts.min_class_size)->capture_default_str();
        prepare->add_option("--stop-general", prepare_opts.stop_general);
        prepare->add_option("--stop-twitter", prepare_opts.stop_twitter);
        prepare->add_option("--stemmer", prepare_opts.stemmer, "none | suffix")
            ->capture_default_str();
        prepare->callback([&]() { run_prepare(prepare, prepare_opts); });

        CLI::App* thesaurus =
            app.add_subcommand("thesaurus", "mine a hashtag or category thesaurus");
        add_common(thesaurus, thesaurus_opts.common);
        thesaurus->add_option("--kind", thesaurus_opts.kind, "hashtag | category");
        thesaurus->add_option("--corpus", thesaurus_opts.corpus,
                              "raw stream (hashtag) or prepared labeled corpus (category)");
        thesaurus->add_option("--max-depth", thesaurus_opts.max_depth)->capture_default_str();
        thesaurus->add_option("--min-support", thesaurus_opts.min_support)->capture_default_str();
        thesaurus->add_option("--weighting", thesaurus_opts.weighting, "frequency | tfidf")
            ->capture_default_str();
        thesaurus->add_option("--stop-general", thesaurus_opts.stop_general);
        thesaurus->add_option("--stop-twitter", thesaurus_opts.stop_twitter);
        thesaurus->add_option("--stemmer", thesaurus_opts.stemmer)->capture_default_str();
        thesaurus->add_option("--source", thesaurus_opts.source)->capture_default_str();
        thesaurus->callback([&]() { run_thesaurus(thesaurus, thesaurus_opts); });

        CLI::App* expand = app.add_subcommand("expand", "append thesaurus words to a corpus");
        add_common(expand, expand_opts.common);
        expand->add_option("--corpus", expand_opts.corpus, "prepared corpus");
        expand->add_option("--thesaurus", expand_opts.thesaurus, "thesaurus file");
        expand->add_option("--n", expand_opts.n, "words per key")->capture_default_str();
        expand->add_option("--side", expand_opts.side, "document | query | both")
            ->capture_default_str();
        expand->add_option("--role", expand_opts.role, "training | testing")
            ->capture_default_str();
        expand->callback([&]() { run_expand(expand, expand_opts); });

        CLI::App* train = app.add_subcommand("train", "fit the pipeline and write a model");
        add_common(train, train_opts.common);
        add_pipeline_flags(train, train_opts.pipe);
        train->callback([&]() { run_train(train, train_opts); });

        CLI::App* evaluate =
            app.add_subcommand("evaluate", "cross-validate the pipeline and write metrics");
        add_eval_flags(evaluate, eval_opts);
        evaluate->callback([&]() { run_evaluate(evaluate, eval_opts); });

        CLI::App* sweep =
            app.add_subcommand("sweep", "cross-validate across one swept parameter");
        add_eval_flags(sweep, sweep_opts.eval);
        sweep->add_option("--axis", sweep_opts.axis,
                          "keep_fraction | expansion_n | class_weight | C");
        sweep->add_option("--values", sweep_opts.values, "comma-separated value list");
        sweep->add_option("--weight-target", sweep_opts.weight_target,
                          "category whose weight is swept (axis class_weight)");
        sweep->callback([&]() { run_sweep(sweep, sweep_opts); });

        CLI::App* grid = app.add_subcommand("grid-search", "pick C by cross-validated macro-F1");
        add_common(grid, grid_opts.common);
        grid->add_option("--corpus", grid_opts.corpus, "prepared labeled corpus");
        grid->add_option("--values", grid_opts.values, "candidate C values, comma-separated");
        grid->add_option("--k", grid_opts.k)->capture_default_str();
        grid->add_option("--learner", grid_opts.learner, "logreg | svm")->capture_default_str();
        grid->add_option("--ngram-max", grid_opts.ngram_max)->capture_default_str();
        grid->add_option("--min-df", grid_opts.min_df)->capture_default_str();
        grid->add_option("--keep-fraction", grid_opts.keep_fraction)->capture_default_str();
        grid->add_option("--epochs", grid_opts.epochs)->capture_default_str();
        grid->add_option("--class-weight", grid_opts.class_weight_kvs,
                         "per-class loss weight, CATEGORY=WEIGHT (repeatable)");
        grid->callback([&]() { run_grid(grid, grid_opts); });

        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const stx::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
