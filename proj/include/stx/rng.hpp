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

// Deterministic randomness. Every stochastic step in the toolkit draws from a
// generator keyed by (seed, purpose, entity), so results are reproducible
// across platforms and independent of iteration or scheduling order. We avoid
// std::shuffle / std::uniform_int_distribution on purpose: their output is
// implementation-defined and would tie artifacts to one standard library.

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stx {

/// One splitmix64 scramble step. Good enough statistics for shuffles and
/// sampling, and trivially portable.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// FNV-1a over raw bytes; used both for seed derivation and file fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {
inline std::uint64_t seed_component(std::string_view s) { return fnv1a64(s); }
inline std::uint64_t seed_component(const std::string& s) { return fnv1a64(s); }
inline std::uint64_t seed_component(const char* s) { return fnv1a64(s); }
template <std::integral I>
std::uint64_t seed_component(I v) {
    return static_cast<std::uint64_t>(v);
}
}  // namespace detail

/// Fold any mix of strings and integers into a child seed. Order matters.
template <class... Parts>
std::uint64_t derive_seed(std::uint64_t seed, const Parts&... parts) {
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ detail::seed_component(parts))), ...);
    return h;
}

/// Small counter-free generator: repeated splitmix64 over its own state.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n) via Lemire's multiply-shift. n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

/// Fisher-Yates with our own generator so permutations are stable everywhere.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

/// Draw `take` distinct indices from [0, pool) by a partial Fisher-Yates pass.
/// Returned order is the draw order. take must be <= pool.
inline std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t take, Rng& rng) {
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    std::vector<std::size_t> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(pool - i));
        std::swap(idx[i], idx[j]);
        out.push_back(idx[i]);
    }
    return out;
}

}  // namespace stx
