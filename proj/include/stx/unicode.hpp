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

// Just enough Unicode for tweet cleanup: UTF-8 decoding, whitespace
// classification, and a coarse punctuation/symbol/emoji filter. No ICU —
// the block ranges below cover what actually shows up in short social text.

#include <cstdint>
#include <string>
#include <string_view>

namespace stx {

constexpr char32_t kReplacementChar = 0xfffd;

/// Decode one code point starting at byte offset i; advances i past it.
/// Malformed bytes decode to U+FFFD one byte at a time, so bad input never
/// throws and never stalls.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xe0) == 0xc0) { len = 2; cp = b0 & 0x1f; }
    else if ((b0 & 0xf0) == 0xe0) { len = 3; cp = b0 & 0x0f; }
    else if ((b0 & 0xf8) == 0xf0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return kReplacementChar; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; return kReplacementChar; }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = byte(i + static_cast<std::size_t>(k));
        if ((bk & 0xc0) != 0x80) { ++i; return kReplacementChar; }
        cp = (cp << 6) | (bk & 0x3f);
    }
    i += static_cast<std::size_t>(len);
    // reject overlong forms and surrogates; they only come from broken input
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xd800 && cp <= 0xdfff) || cp > 0x10ffff) {
        return kReplacementChar;
    }
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
        case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200a);
    }
}

/// True for code points we strip from tokens: punctuation, symbols, emoji,
/// control characters. Letters (any script), digits, and combining marks stay.
/// '#' is included here; the tokenizer re-adds a token-initial '#' itself.
inline bool is_strippable_cp(char32_t cp) {
    if (cp < 0x80) {
        bool keep = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
        return !keep;
    }
    if (cp < 0xa0) return true;                     // C1 controls
    if (cp >= 0xa1 && cp <= 0xbf) return true;      // latin-1 punctuation and signs
    if (cp == 0xd7 || cp == 0xf7) return true;      // multiply / divide signs
    if (cp >= 0x2000 && cp <= 0x206f) return true;  // general punctuation
    if (cp >= 0x20a0 && cp <= 0x20cf) return true;  // currency symbols
    if (cp >= 0x2100 && cp <= 0x2bff) return true;  // letterlike, arrows, math, misc symbols
    if (cp >= 0x2e00 && cp <= 0x2e7f) return true;  // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303f) return true;  // CJK punctuation
    if (cp >= 0xfe10 && cp <= 0xfe6f) return true;  // vertical/small forms, compat punct
    if (cp >= 0xff01 && cp <= 0xff0f) return true;  // fullwidth punctuation runs
    if (cp >= 0xff1a && cp <= 0xff20) return true;
    if (cp >= 0xff3b && cp <= 0xff40) return true;
    if (cp >= 0xff5b && cp <= 0xff65) return true;
    if (cp >= 0xffe0 && cp <= 0xffee) return true;
    if (cp >= 0x1f000 && cp <= 0x1fbff) return true;  // emoji and friends
    if (cp == kReplacementChar) return true;
    return false;
}

/// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

/// Strip leading/trailing Unicode whitespace.
inline std::string_view trim_spaces(std::string_view s) {
    std::size_t begin = 0;
    std::size_t last_good = 0;
    std::size_t i = 0;
    bool seen = false;
    std::size_t end = 0;
    while (i < s.size()) {
        std::size_t start = i;
        char32_t cp = decode_utf8(s, i);
        if (!is_space_cp(cp)) {
            if (!seen) begin = start;
            seen = true;
            end = i;
        }
        last_good = i;
    }
    (void)last_good;
    if (!seen) return std::string_view{};
    return s.substr(begin, end - begin);
}

}  // namespace stx
