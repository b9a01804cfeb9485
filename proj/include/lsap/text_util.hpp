#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lsap {

// Small string helpers shared across the pipeline. All pure, all ASCII-safe;
// multi-byte UTF-8 passes through untouched (we only ever inspect ASCII
// whitespace and letters).

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

// Collapses runs of whitespace to single spaces and trims the ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading spaces dropped
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

// Canonical form used when checking utterance identity across corpora.
inline std::string normalize_utterance(std::string_view s) {
    return to_lower(collapse_whitespace(s));
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.emplace_back(s.substr(pos));
            break;
        }
        out.emplace_back(s.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

// Label comparison form: lowercase, collapsed whitespace, and a canonical
// " # " between multi-intent components so "a#b" and "a # b" compare equal.
inline std::string normalize_label(std::string_view s) {
    std::string folded = to_lower(collapse_whitespace(s));
    std::vector<std::string> parts;
    for (const std::string& p : split_on(folded, "#")) {
        std::string t = trim(p);
        if (!t.empty()) parts.push_back(std::move(t));
    }
    if (parts.empty()) return folded;  // a label that is just "#"s; keep as-is
    return join(parts, " # ");
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace lsap
