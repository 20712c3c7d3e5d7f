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

// Run manifests: enough provenance to reproduce an artifact (command,
// resolved config, content hashes of every input, the seed) and nothing
// time-dependent, so reruns produce byte-identical manifests.

#include <cstdint>
#include <map>
#include <string>

#include "stx/jsonl.hpp"

namespace stx {

struct Manifest {
    std::string command;
    json config = json::object();
    std::map<std::string, std::string> inputs;  // path → content hash (hex)
    std::uint64_t seed = 0;
};

inline json manifest_to_json(const Manifest& m) {
    json inputs = json::object();
    for (const auto& [path, hash] : m.inputs) inputs[path] = hash;
    json j = json::object();
    j["command"] = m.command;
    j["config"] = m.config;
    j["inputs"] = inputs;
    j["seed"] = m.seed;
    return j;
}

/// Hash of the manifest's canonical serialization; stamped into artifacts
/// so outputs can be traced back to the exact run that produced them.
inline std::string manifest_hash_of(const Manifest& m) {
    return hex64(fnv1a64(manifest_to_json(m).dump()));
}

inline void write_manifest(const std::string& path, const Manifest& m) {
    atomic_write(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace stx
