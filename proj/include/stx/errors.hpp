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

#include <stdexcept>
#include <string>
#include <vector>

namespace stx {

/// Base class for all data-level failures raised by the toolkit.
/// Argument/usage mistakes throw std::invalid_argument instead.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Raised when more than half of an input file's lines are unusable.
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

struct EmptyCorpusError : Error {
    explicit EmptyCorpusError(const std::string& msg) : Error(msg) {}
};

struct StratificationError : Error {
    std::string class_id;
    StratificationError(const std::string& cls, const std::string& msg)
        : Error(msg), class_id(cls) {}
};

struct UnknownNodeError : Error {
    std::string node;
    explicit UnknownNodeError(const std::string& n)
        : Error("unknown taxonomy node: " + n), node(n) {}
};

struct CycleError : Error {
    std::vector<std::string> cycle;
    explicit CycleError(std::vector<std::string> nodes)
        : Error(join(nodes)), cycle(std::move(nodes)) {}

  private:
    static std::string join(const std::vector<std::string>& nodes) {
        std::string s = "taxonomy cycle:";
        for (const auto& n : nodes) {
            s += ' ';
            s += n;
        }
        return s;
    }
};

struct MalformedTaxonomyError : Error {
    explicit MalformedTaxonomyError(const std::string& msg) : Error(msg) {}
};

struct EmptyVocabularyError : Error {
    explicit EmptyVocabularyError(const std::string& msg) : Error(msg) {}
};

struct DegenerateLabelsError : Error {
    explicit DegenerateLabelsError(const std::string& msg) : Error(msg) {}
};

struct DivergedError : Error {
    std::string class_id;
    std::size_t epoch;
    DivergedError(const std::string& cls, std::size_t ep)
        : Error("training diverged for class '" + cls + "' at epoch " + std::to_string(ep)),
          class_id(cls), epoch(ep) {}
};

}  // namespace stx
