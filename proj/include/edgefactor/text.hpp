#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edgefactor {

// Ordered lowercase alphanumeric tokens; the unit every matcher and cohort
// operation works on.
using TokenSeq = std::vector<std::string>;

struct NormalizeStats {
    std::size_t invalid_bytes = 0;
};

namespace detail {

// Returns the sequence length (2..4) for a valid UTF-8 sequence starting at
// s[i], or 0 if the bytes are not well formed.
inline std::size_t utf8_seq_len(std::string_view s, std::size_t i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0u) == 0x80u;
    };
    if (b0 >= 0xC2 && b0 <= 0xDF)
        return cont(1) ? 2 : 0;
    if (b0 == 0xE0) {
        if (i + 1 < s.size()) {
            unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            if (b1 >= 0xA0 && b1 <= 0xBF && cont(2))
                return 3;
        }
        return 0;
    }
    if (b0 >= 0xE1 && b0 <= 0xEC)
        return cont(1) && cont(2) ? 3 : 0;
    if (b0 == 0xED) {
        if (i + 1 < s.size()) {
            unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            if (b1 >= 0x80 && b1 <= 0x9F && cont(2))
                return 3; // excludes surrogates
        }
        return 0;
    }
    if (b0 >= 0xEE && b0 <= 0xEF)
        return cont(1) && cont(2) ? 3 : 0;
    if (b0 == 0xF0) {
        if (i + 1 < s.size()) {
            unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            if (b1 >= 0x90 && b1 <= 0xBF && cont(2) && cont(3))
                return 4;
        }
        return 0;
    }
    if (b0 >= 0xF1 && b0 <= 0xF3)
        return cont(1) && cont(2) && cont(3) ? 4 : 0;
    if (b0 == 0xF4) {
        if (i + 1 < s.size()) {
            unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
            if (b1 >= 0x80 && b1 <= 0x8F && cont(2) && cont(3))
                return 4;
        }
        return 0;
    }
    return 0;
}

} // namespace detail

// Tokenization rules (the single most consequential text choice, pinned here):
//   - ASCII letters are lowercased, letters and digits are token characters;
//   - '-' and '\'' are deleted so their neighbors fuse ("C-reactive" ->
//     "creactive", "e-cigarette" -> "ecigarette");
//   - every other ASCII byte breaks the token;
//   - well-formed multi-byte UTF-8 sequences are kept verbatim as token
//     characters (no diacritic stripping);
//   - malformed UTF-8 bytes are removed and counted in stats.
inline TokenSeq normalize_text(std::string_view raw, NormalizeStats& stats) {
    TokenSeq tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        unsigned char b = static_cast<unsigned char>(raw[i]);
        if (b < 0x80) {
            if (b >= 'A' && b <= 'Z') {
                current.push_back(char(b - 'A' + 'a'));
            } else if ((b >= 'a' && b <= 'z') || (b >= '0' && b <= '9')) {
                current.push_back(char(b));
            } else if (b == '-' || b == '\'') {
                // deleted: neighbors join
            } else {
                flush();
            }
            ++i;
            continue;
        }
        std::size_t len = detail::utf8_seq_len(raw, i);
        if (len == 0) {
            ++stats.invalid_bytes;
            ++i;
            continue;
        }
        current.append(raw.substr(i, len));
        i += len;
    }
    flush();
    return tokens;
}

inline TokenSeq normalize_text(std::string_view raw) {
    NormalizeStats stats;
    return normalize_text(raw, stats);
}

inline std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i)
            out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

// Splits an already-normalized string on single spaces.
inline TokenSeq split_tokens(std::string_view normalized) {
    TokenSeq out;
    std::size_t start = 0;
    while (start <= normalized.size()) {
        std::size_t pos = normalized.find(' ', start);
        if (pos == std::string_view::npos)
            pos = normalized.size();
        if (pos > start)
            out.emplace_back(normalized.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace edgefactor
