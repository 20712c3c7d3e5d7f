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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stx/corpus.hpp"
#include "stx/errors.hpp"
#include "stx/jsonl.hpp"

#include "oracles.hpp"

namespace fs = std::filesystem;
using stx::RawRecord;

namespace {

fs::path write_jsonl(const fs::path& dir, const std::string& name,
                     const std::vector<std::string>& lines) {
    std::string body;
    for (const auto& l : lines) body += l + "\n";
    fs::path p = dir / name;
    stx::atomic_write(p, body);
    return p;
}

RawRecord rec(std::string id, std::string text, const char* label = nullptr,
              const char* retweet_of = nullptr) {
    RawRecord r;
    r.id = std::move(id);
    r.text = std::move(text);
    if (label) r.label_node = label;
    if (retweet_of) r.retweet_of = retweet_of;
    return r;
}

}  // namespace

TEST_CASE("ingest keeps usable records in file order and counts skips", "[corpus]") {
    fs::path dir = oracle::make_temp_dir("ingest");
    fs::path p = write_jsonl(dir, "in.jsonl",
                             {
                                 R"({"_meta":{"format":"stx-raw","version":1}})",
                                 R"({"id":"t1","text":"hello","label_node":"n1"})",
                                 "",
                                 R"({"id":"t2","text":"world"})",
                                 R"({"id":"t3","text":"again","retweet_of":"t1"})",
                             });
    stx::IngestResult r = stx::ingest(p, stx::Source::twitter);
    REQUIRE(r.records.size() == 3);
    CHECK(r.read == 3);
    CHECK(r.skipped == 0);
    CHECK(r.records[0].id == "t1");
    CHECK(r.records[0].label_node == "n1");
    CHECK_FALSE(r.records[0].retweet_of.has_value());
    CHECK(r.records[1].id == "t2");
    CHECK_FALSE(r.records[1].label_node.has_value());
    CHECK(r.records[2].retweet_of == "t1");
    CHECK(r.records[2].source == stx::Source::twitter);
    fs::remove_all(dir);
}

TEST_CASE("ingest skips malformed lines, bad fields and duplicate ids", "[corpus]") {
    fs::path dir = oracle::make_temp_dir("ingest2");
    fs::path p = write_jsonl(dir, "in.jsonl",
                             {
                                 R"({"id":"a","text":"ok one"})",
                                 "{not json",
                                 R"(["array","not","object"])",
                                 R"({"id":"","text":"empty id"})",
                                 R"({"id":"b"})",
                                 R"({"id":"c","text":123})",
                                 R"({"id":"d","text":"bad retweet","retweet_of":9})",
                                 R"({"id":"a","text":"duplicate"})",
                                 R"({"id":"e","text":"ok two"})",
                                 R"({"id":"f","text":"ok three"})",
                                 R"({"id":"g","text":"ok four"})",
                                 R"({"id":"h","text":"ok five"})",
                                 R"({"id":"i","text":"ok six"})",
                                 R"({"id":"j","text":"ok seven"})",
                                 R"({"id":"k","text":"ok eight"})",
                             });
    stx::IngestResult r = stx::ingest(p, stx::Source::amazon);
    std::vector<std::string> ids;
    for (const auto& rr : r.records) ids.push_back(rr.id);
    CHECK(ids == std::vector<std::string>{"a", "e", "f", "g", "h", "i", "j", "k"});
    CHECK(r.read == 8);
    CHECK(r.skipped == 7);
    CHECK(r.records[0].text == "ok one");  // first id wins
    fs::remove_all(dir);
}

TEST_CASE("ingest throws FormatError when skips outnumber reads", "[corpus]") {
    fs::path dir = oracle::make_temp_dir("ingest3");
    fs::path p = write_jsonl(dir, "in.jsonl",
                             {
                                 R"({"id":"a","text":"only good line"})",
                                 "junk1",
                                 "junk2",
                             });
    CHECK_THROWS_AS(stx::ingest(p, stx::Source::twitter), stx::FormatError);
    fs::remove_all(dir);
}

TEST_CASE("ingest throws IoError on a missing file", "[corpus]") {
    CHECK_THROWS_AS(stx::ingest("/no/such/file.jsonl", stx::Source::twitter), stx::IoError);
}

TEST_CASE("filter_corpus removes retweets, unlabeled, rare classes in that order", "[corpus]") {
    // class B drops to one post-retweet member and is pruned as rare;
    // the prune must NOT cascade into re-checking class A.
    std::vector<RawRecord> records = {
        rec("t1", "a one", "nodeA"),
        rec("t2", "a two", "nodeA"),
        rec("t3", "b one", "nodeB"),
        rec("t4", "b two", "nodeB", "t3"),  // retweet
        rec("t5", "unlabeled"),
    };
    std::map<std::string, std::string> labels = {{"nodeA", "CatA"}, {"nodeB", "CatB"}};
    stx::FilterStats stats;
    stx::Corpus<RawRecord> c = stx::filter_corpus(records, labels, 2, &stats);

    CHECK(stats.retweets_removed == 1);
    CHECK(stats.unlabeled_removed == 1);
    CHECK(stats.rare_class_removed == 1);
    REQUIRE(c.documents.size() == 2);
    CHECK(c.documents[0].id == "t1");
    CHECK(c.documents[1].id == "t2");
    CHECK(c.documents[0].root_category == "CatA");
    CHECK(c.class_counts == std::map<std::string, std::size_t>{{"CatA", 2}});
    CHECK(c.min_class_size == 2);
}

TEST_CASE("filter_corpus keeps borderline classes at exactly min_class_size", "[corpus]") {
    std::vector<RawRecord> records = {
        rec("t1", "x", "n1"),
        rec("t2", "x", "n1"),
        rec("t3", "y", "n2"),
        rec("t4", "y", "n2"),
        rec("t5", "y", "n2"),
    };
    std::map<std::string, std::string> labels = {{"n1", "A"}, {"n2", "B"}};
    stx::Corpus<RawRecord> c = stx::filter_corpus(records, labels, 2, nullptr);
    CHECK(c.class_counts == std::map<std::string, std::size_t>{{"A", 2}, {"B", 3}});
    CHECK(c.min_class_size == 2);
}

TEST_CASE("filter_corpus flags unknown label nodes", "[corpus]") {
    std::vector<RawRecord> records = {rec("t1", "x", "mystery")};
    std::map<std::string, std::string> labels = {{"n1", "A"}};
    CHECK_THROWS_AS(stx::filter_corpus(records, labels, 1, nullptr), stx::UnknownNodeError);
}

TEST_CASE("filter_corpus rejects an empty result and a zero threshold", "[corpus]") {
    std::map<std::string, std::string> labels = {{"n1", "A"}};
    std::vector<RawRecord> only_retweets = {rec("t1", "x", "n1", "t0")};
    CHECK_THROWS_AS(stx::filter_corpus(only_retweets, labels, 1, nullptr),
                    stx::EmptyCorpusError);

    std::vector<RawRecord> fine = {rec("t1", "x", "n1")};
    CHECK_THROWS_AS(stx::filter_corpus(fine, labels, 0, nullptr), std::invalid_argument);
}

TEST_CASE("train_test_split rounds per class and clamps to at least one", "[corpus]") {
    auto make = [](std::size_t na, std::size_t nb) {
        stx::Corpus<RawRecord> c;
        for (std::size_t i = 0; i < na; ++i) {
            RawRecord r = rec("a" + std::to_string(i), "x");
            r.root_category = "A";
            c.documents.push_back(r);
        }
        for (std::size_t i = 0; i < nb; ++i) {
            RawRecord r = rec("b" + std::to_string(i), "x");
            r.root_category = "B";
            c.documents.push_back(r);
        }
        stx::recount_classes(c);
        return c;
    };

    // round(0.3·10) = 3 per class
    auto [train, test] = stx::train_test_split(make(10, 10), 0.3, 42);
    std::map<std::string, std::size_t> test_counts;
    for (const auto& d : test.documents) ++test_counts[*d.root_category];
    CHECK(test_counts == std::map<std::string, std::size_t>{{"A", 3}, {"B", 3}});
    CHECK(train.documents.size() == 14);

    // round(0.05·10) = 1 after the >= 1 clamp
    auto [tr2, te2] = stx::train_test_split(make(10, 10), 0.05, 42);
    std::map<std::string, std::size_t> te2_counts;
    for (const auto& d : te2.documents) ++te2_counts[*d.root_category];
    CHECK(te2_counts == std::map<std::string, std::size_t>{{"A", 1}, {"B", 1}});

    // half-away-from-zero: round(0.25·10) = 3
    auto [tr3, te3] = stx::train_test_split(make(10, 10), 0.25, 42);
    CHECK(te3.documents.size() == 6);
}

TEST_CASE("train_test_split is disjoint, covering and order-preserving", "[corpus]") {
    stx::Corpus<RawRecord> c;
    for (std::size_t i = 0; i < 12; ++i) {
        RawRecord r = rec("t" + std::to_string(i), "x");
        r.root_category = (i % 2 == 0) ? "A" : "B";
        c.documents.push_back(r);
    }
    stx::recount_classes(c);

    auto [train, test] = stx::train_test_split(c, 0.5, 7);
    std::set<std::string> train_ids, test_ids;
    for (const auto& d : train.documents) train_ids.insert(d.id);
    for (const auto& d : test.documents) test_ids.insert(d.id);
    CHECK(train_ids.size() + test_ids.size() == 12);
    for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);

    // order within each half follows the input order
    auto in_order = [&](const std::vector<RawRecord>& docs) {
        std::size_t last = 0;
        bool first = true;
        for (const auto& d : docs) {
            std::size_t num = std::stoul(d.id.substr(1));
            if (!first && num < last) return false;
            last = num;
            first = false;
        }
        return true;
    };
    CHECK(in_order(train.documents));
    CHECK(in_order(test.documents));

    // class counts were recomputed on both halves
    CHECK(train.class_counts.at("A") + test.class_counts.at("A") == 6);
    CHECK(train.class_counts.at("B") + test.class_counts.at("B") == 6);
}

TEST_CASE("train_test_split is seed-deterministic", "[corpus]") {
    stx::Corpus<RawRecord> c;
    for (std::size_t i = 0; i < 20; ++i) {
        RawRecord r = rec("t" + std::to_string(i), "x");
        r.root_category = "A";
        c.documents.push_back(r);
    }
    stx::recount_classes(c);

    auto [tr1, te1] = stx::train_test_split(c, 0.4, 99);
    auto [tr2, te2] = stx::train_test_split(c, 0.4, 99);
    auto [tr3, te3] = stx::train_test_split(c, 0.4, 100);

    auto ids = [](const stx::Corpus<RawRecord>& k) {
        std::vector<std::string> v;
        for (const auto& d : k.documents) v.push_back(d.id);
        return v;
    };
    CHECK(ids(te1) == ids(te2));
    CHECK(ids(te1) != ids(te3));
}

TEST_CASE("train_test_split validates inputs", "[corpus]") {
    stx::Corpus<RawRecord> c;
    RawRecord a = rec("t1", "x");
    a.root_category = "A";
    c.documents = {a};
    stx::recount_classes(c);

    // a single-member class cannot give both halves a sample
    CHECK_THROWS_AS(stx::train_test_split(c, 0.5, 1), stx::StratificationError);

    RawRecord b = rec("t2", "x");
    b.root_category = "A";
    c.documents.push_back(b);
    stx::recount_classes(c);
    CHECK_THROWS_AS(stx::train_test_split(c, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(stx::train_test_split(c, 1.0, 1), std::invalid_argument);

    RawRecord u = rec("t3", "x");  // unlabeled
    c.documents.push_back(u);
    CHECK_THROWS_AS(stx::train_test_split(c, 0.5, 1), std::invalid_argument);
}
