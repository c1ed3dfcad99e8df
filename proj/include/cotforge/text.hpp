#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace cotforge {

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_ascii_space(s[b])) ++b;
    while (e > b && is_ascii_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

/// Collapses every whitespace run to a single space and trims the ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_ascii_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

/// Case-fold + whitespace collapse. Used for containment checks on free text.
inline std::string normalize_text(std::string_view s) {
    return collapse_whitespace(to_lower(s));
}

/// Case-fold, ASCII punctuation to spaces, whitespace collapse.
/// Used for diagnosis-label equality.
inline std::string normalize_label(std::string_view s) {
    std::string mapped;
    mapped.reserve(s.size());
    for (char c : s) {
        unsigned char uc = static_cast<unsigned char>(c);
        mapped.push_back(std::ispunct(uc) ? ' ' : c);
    }
    return collapse_whitespace(to_lower(mapped));
}

inline bool contains_normalized(std::string_view haystack, std::string_view needle) {
    return normalize_text(haystack).find(normalize_text(needle)) != std::string::npos;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ascii_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_ascii_space(s[j])) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string line(s.substr(start, i - start));
            if (!line.empty() && line.back() == '\r') line.pop_back();
            out.push_back(std::move(line));
            start = i + 1;
        }
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

/// Counts non-overlapping occurrences of `word`. ASCII words are matched on
/// boundaries (neighbours must not be alphanumeric); multi-byte words (e.g.
/// Chinese connectives) are matched as plain substrings.
inline std::size_t count_word_occurrences(std::string_view text, std::string_view word) {
    if (word.empty()) return 0;
    bool ascii = std::all_of(word.begin(), word.end(),
                             [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string_view::npos) {
        bool ok = true;
        if (ascii) {
            if (pos > 0 && is_word_char(text[pos - 1])) ok = false;
            std::size_t end = pos + word.size();
            if (end < text.size() && is_word_char(text[end])) ok = false;
        }
        if (ok) ++count;
        pos += word.size();
    }
    return count;
}

}  // namespace cotforge
