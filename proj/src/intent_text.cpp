#include "lsap/intent_text.hpp"

#include <cctype>
#include <stdexcept>

#include "lsap/corpus.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// A word counts as an acronym (casing preserved) when every letter in it is
// uppercase and it contains at least one letter: "NYC", "A4".
bool is_all_caps(const std::string& w) {
    bool has_alpha = false;
    for (char c : w) {
        if (is_lower(c)) return false;
        if (is_upper(c)) has_alpha = true;
    }
    return has_alpha;
}

// Splits one identifier chunk at camel-case boundaries: before an uppercase
// letter that follows a lowercase letter or digit ("BookFlight"), and before
// the last uppercase of an uppercase run followed by lowercase ("NYCTrip").
std::vector<std::string> split_camel(const std::string& chunk) {
    std::vector<std::string> words;
    std::string cur;
    const size_t n = chunk.size();
    for (size_t i = 0; i < n; ++i) {
        const char c = chunk[i];
        bool boundary = false;
        if (!cur.empty() && is_upper(c)) {
            const char prev = chunk[i - 1];
            if (is_lower(prev) || is_digit(prev)) {
                boundary = true;
            } else if (is_upper(prev) && i + 1 < n && is_lower(chunk[i + 1])) {
                boundary = true;
            }
        }
        if (boundary) {
            words.push_back(cur);
            cur.clear();
        }
        cur.push_back(c);
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

std::string strip_prefixes(const std::string& raw, const IntentTextConfig& cfg) {
    const std::string low = to_lower(raw);
    for (const auto& prefix : cfg.strip_prefixes) {
        if (prefix.empty()) continue;
        if (starts_with(low, to_lower(prefix)) && raw.size() > prefix.size()) {
            return raw.substr(prefix.size());
        }
    }
    return raw;
}

}  // namespace

std::string naturalize_intent(const std::string& raw, const IntentTextConfig& cfg) {
    if (trim(raw).empty()) {
        throw std::invalid_argument("naturalize_intent: empty intent identifier");
    }
    std::string body = strip_prefixes(trim(raw), cfg);

    // Separators become spaces, then each space-delimited chunk is split at
    // camel-case boundaries.
    for (char& c : body) {
        if (c == '_' || c == '-' || c == '#' || c == '.' || c == '/') c = ' ';
    }
    std::vector<std::string> words;
    for (const auto& chunk : split_ws(body)) {
        for (auto& w : split_camel(chunk)) words.push_back(std::move(w));
    }
    if (words.empty()) {
        throw std::invalid_argument("naturalize_intent: identifier '" + raw +
                                    "' contains no word characters");
    }
    for (auto& w : words) {
        if (!is_all_caps(w)) w = to_lower(w);
    }
    std::string label = join(words, " ");
    if (is_lower(label[0])) label[0] = static_cast<char>(label[0] - 'a' + 'A');
    return label;
}

std::string join_multi_intent(const std::vector<std::string>& labels) {
    if (labels.empty()) {
        throw std::invalid_argument("join_multi_intent: empty label list");
    }
    std::string out;
    for (size_t i = 0; i < labels.size(); ++i) {
        std::string part = collapse_whitespace(labels[i]);
        if (part.empty()) throw std::invalid_argument("join_multi_intent: empty label component");
        if (i > 0 && is_upper(part[0])) part[0] = static_cast<char>(part[0] - 'A' + 'a');
        if (i) out += " # ";
        out += part;
    }
    return out;
}

std::string natural_label_for(const LabeledExample& ex, const IntentTextConfig& cfg) {
    if (ex.intents.empty()) {
        throw std::invalid_argument("example '" + ex.id + "' has no intents");
    }
    std::vector<std::string> parts;
    parts.reserve(ex.intents.size());
    for (const auto& raw : ex.intents) parts.push_back(naturalize_intent(raw, cfg));
    return join_multi_intent(parts);
}

}  // namespace lsap
