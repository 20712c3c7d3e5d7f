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

// Compressed sparse row matrix: the one feature container everything else
// consumes. Zero-valued entries are not stored, but their columns still
// exist — column count is part of the type's meaning.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stx {

struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> indptr{0};   // rows+1 offsets into indices/values
    std::vector<std::uint32_t> indices;   // strictly increasing within a row
    std::vector<double> values;           // finite, never zero

    std::size_t nnz() const { return indices.size(); }

    /// Append one row. Entries must be sorted by column, strictly
    /// increasing, within [0, cols); zero and non-finite values are refused.
    void append_row(const std::vector<std::pair<std::uint32_t, double>>& entries) {
        std::uint32_t prev = 0;
        bool first = true;
        for (const auto& [col, val] : entries) {
            if (col >= cols) throw std::invalid_argument("sparse row entry beyond column count");
            if (!first && col <= prev) {
                throw std::invalid_argument("sparse row columns must strictly increase");
            }
            if (val == 0.0 || !std::isfinite(val)) {
                throw std::invalid_argument("sparse entries must be finite and non-zero");
            }
            indices.push_back(col);
            values.push_back(val);
            prev = col;
            first = false;
        }
        ++rows;
        indptr.push_back(indices.size());
    }

    std::size_t row_begin(std::size_t i) const { return indptr[i]; }
    std::size_t row_end(std::size_t i) const { return indptr[i + 1]; }

    double dot_row(std::size_t i, const std::vector<double>& w) const {
        double s = 0.0;
        for (std::size_t k = row_begin(i); k < row_end(i); ++k) {
            s += values[k] * w[indices[k]];
        }
        return s;
    }

    /// Dense copy of one row; test and oracle convenience, not a hot path.
    std::vector<double> row_dense(std::size_t i) const {
        std::vector<double> out(cols, 0.0);
        for (std::size_t k = row_begin(i); k < row_end(i); ++k) {
            out[indices[k]] = values[k];
        }
        return out;
    }

    bool operator==(const SparseMatrix&) const = default;
};

}  // namespace stx
