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

// Line-oriented JSON file helpers shared by every reader/writer in the
// toolkit: streaming line iteration, crash-safe writes (temp file + rename),
// and stable content fingerprints.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "stx/errors.hpp"
#include "stx/rng.hpp"

namespace stx {

using json = nlohmann::json;

/// Parse without exceptions; returns a discarded value on bad input.
inline json parse_lenient(std::string_view text) {
    return json::parse(text, nullptr, false);
}

/// Calls fn(line) for every line of the file. Handles trailing CR and a
/// missing final newline. Throws IoError if the file cannot be opened.
inline void for_each_line(const std::filesystem::path& path,
                          const std::function<void(std::string_view)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        fn(line);
    }
    if (in.bad()) throw IoError("read failure on file: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on file: " + path.string());
    return data;
}

/// Write-all-or-nothing: content lands in a sibling temp file first and is
/// renamed over the target, so readers never observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failure on file: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot finalize file " + path.string() + ": " + ec.message());
}

/// Serialize a JSON value one object per line. Keys come out sorted because
/// nlohmann's default object storage is ordered — do not switch to
/// ordered_json here, byte-stable artifacts depend on it.
inline std::string dump_line(const json& j) { return j.dump() + "\n"; }

inline std::uint64_t hash_bytes(std::string_view bytes) { return fnv1a64(bytes); }

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    return fnv1a64(read_file(path));
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

/// Meta lines ride along inside our JSONL artifacts (hashes, counts); they
/// are marked by a top-level "_meta" key and are not records.
inline bool is_meta_line(const json& j) { return j.is_object() && j.contains("_meta"); }

}  // namespace stx
