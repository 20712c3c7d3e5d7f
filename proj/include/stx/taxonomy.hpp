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

// Browse-node hierarchy: load a child→parents graph from JSONL and walk any
// node up to its root category. Nodes may have several parents; the walk
// picks one with a draw keyed on (seed, node id) so the same node always
// resolves the same way no matter who asks first.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stx/errors.hpp"
#include "stx/jsonl.hpp"
#include "stx/rng.hpp"

namespace stx {

struct TaxonomyGraph {
    std::map<std::string, std::vector<std::string>> parents;  // empty list = root
    std::map<std::string, std::string> names;
    std::set<std::string> roots;
    std::vector<std::string> load_warnings;  // duplicates, placeholder parents
};

/// Load from JSONL lines {node_id, parent_ids: [...], name}. Parents that
/// are referenced but never declared become placeholder roots (real browse
/// node dumps are incomplete; refusing them would block ingestion). On
/// duplicate node_id lines the last one wins. Both cases leave a warning.
inline TaxonomyGraph load_taxonomy(const std::filesystem::path& path) {
    TaxonomyGraph g;
    std::size_t line_no = 0;
    for_each_line(path, [&](std::string_view line) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) return;
        json j = parse_lenient(line);
        if (j.is_discarded() || !j.is_object() || is_meta_line(j)) {
            if (!is_meta_line(j)) {
                throw MalformedTaxonomyError("bad taxonomy line " + std::to_string(line_no) +
                                             " in " + path.string());
            }
            return;
        }
        auto id_it = j.find("node_id");
        if (id_it == j.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
            throw MalformedTaxonomyError("taxonomy line " + std::to_string(line_no) +
                                         " lacks a node_id");
        }
        std::string id = id_it->get<std::string>();
        std::vector<std::string> parent_ids;
        if (auto p = j.find("parent_ids"); p != j.end() && p->is_array()) {
            for (const auto& e : *p) {
                if (!e.is_string()) {
                    throw MalformedTaxonomyError("non-string parent id on line " +
                                                 std::to_string(line_no));
                }
                parent_ids.push_back(e.get<std::string>());
            }
        }
        if (g.parents.count(id)) {
            g.load_warnings.push_back("duplicate node '" + id + "' on line " +
                                      std::to_string(line_no) + "; last definition wins");
        }
        g.parents[id] = std::move(parent_ids);
        if (auto n = j.find("name"); n != j.end() && n->is_string()) {
            g.names[id] = n->get<std::string>();
        }
    });

    // materialize referenced-but-undeclared parents as placeholder roots
    std::vector<std::string> missing;
    for (const auto& [id, ps] : g.parents) {
        (void)id;
        for (const std::string& p : ps) {
            if (!g.parents.count(p)) missing.push_back(p);
        }
    }
    for (const std::string& p : missing) {
        if (g.parents.emplace(p, std::vector<std::string>{}).second) {
            g.load_warnings.push_back("parent '" + p + "' never declared; added as placeholder root");
        }
    }
    for (const auto& [id, ps] : g.parents) {
        if (ps.empty()) g.roots.insert(id);
    }
    if (g.roots.empty()) {
        throw MalformedTaxonomyError("taxonomy has no roots: " + path.string());
    }
    return g;
}

namespace detail {

// The shared walk. Memoizing intermediate hops is safe because the parent
// draw is keyed per node, so every suffix of a walk is itself a full answer.
inline std::string resolve_with_memo(const TaxonomyGraph& graph, const std::string& node,
                                     std::uint64_t seed,
                                     std::unordered_map<std::string, std::string>& memo) {
    if (graph.parents.find(node) == graph.parents.end()) throw UnknownNodeError(node);

    std::vector<std::string> path;
    std::unordered_set<std::string> visited;
    std::string current = node;
    std::string root;
    while (true) {
        if (auto m = memo.find(current); m != memo.end()) {
            root = m->second;
            break;
        }
        const std::vector<std::string>& ps = graph.parents.at(current);
        if (ps.empty()) {
            root = current;
            break;
        }
        if (!visited.insert(current).second) {
            // trim the path down to the loop itself
            auto loop_start = std::find(path.begin(), path.end(), current);
            throw CycleError(std::vector<std::string>(loop_start, path.end()));
        }
        path.push_back(current);
        std::size_t pick = 0;
        if (ps.size() > 1) {
            Rng rng(derive_seed(seed, "parent", current));
            pick = static_cast<std::size_t>(rng.bounded(ps.size()));
        }
        current = ps[pick];
        if (graph.parents.find(current) == graph.parents.end()) throw UnknownNodeError(current);
    }
    for (const std::string& n : path) memo.emplace(n, root);
    return root;
}

}  // namespace detail

/// Walk parent links from `node` until a root is reached. Multi-parent
/// nodes pick a parent via a draw keyed on (seed, current node), making the
/// answer a pure function of (graph, node, seed). A visited set bounds the
/// walk by the node count and turns direction loops into CycleError.
inline std::string resolve_root(const TaxonomyGraph& graph, const std::string& node,
                                std::uint64_t seed) {
    std::unordered_map<std::string, std::string> memo;
    return detail::resolve_with_memo(graph, node, seed, memo);
}

struct ResolutionReport {
    std::map<std::string, std::string> resolved;             // node → root
    std::vector<std::pair<std::string, std::string>> errors;  // node → message
};

/// Batch resolve_root sharing one memo table across walks. Failures are
/// collected per node instead of aborting the batch.
inline ResolutionReport resolve_all(const TaxonomyGraph& graph,
                                    const std::vector<std::string>& nodes, std::uint64_t seed) {
    ResolutionReport report;
    std::unordered_map<std::string, std::string> memo;
    std::unordered_set<std::string> failed;
    for (const std::string& node : nodes) {
        if (report.resolved.count(node) || failed.count(node)) continue;
        try {
            report.resolved[node] = detail::resolve_with_memo(graph, node, seed, memo);
        } catch (const Error& e) {
            failed.insert(node);
            report.errors.emplace_back(node, e.what());
        }
    }
    return report;
}

inline json resolution_report_to_json(const ResolutionReport& report) {
    json resolved = json::object();
    for (const auto& [node, root] : report.resolved) resolved[node] = root;
    json errors = json::array();
    for (const auto& [node, msg] : report.errors) {
        errors.push_back(json{{"node", node}, {"message", msg}});
    }
    return json{{"resolved", resolved}, {"errors", errors}};
}

}  // namespace stx
