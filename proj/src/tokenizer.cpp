#include "lsap/tokenizer.hpp"

#include <stdexcept>

#include "lsap/text_util.hpp"

namespace lsap {

namespace {
const std::string kSentinelOpen = "⟨mask_";  // ⟨mask_
const std::string kSentinelClose = "⟩";      // ⟩
}  // namespace

std::vector<std::string> WordTokenizer::tokenize(const std::string& text) const {
    return split_ws(text);
}

std::string WordTokenizer::detokenize(const std::vector<std::string>& tokens) const {
    return join(tokens, " ");
}

std::string WordTokenizer::sentinel(int k) const {
    if (k < 0) throw std::invalid_argument("sentinel index must be non-negative");
    return kSentinelOpen + std::to_string(k) + kSentinelClose;
}

bool WordTokenizer::is_sentinel(const std::string& token, int* k) const {
    if (!starts_with(token, kSentinelOpen)) return false;
    if (token.size() <= kSentinelOpen.size() + kSentinelClose.size()) return false;
    if (token.substr(token.size() - kSentinelClose.size()) != kSentinelClose) return false;
    const std::string digits =
        token.substr(kSentinelOpen.size(),
                     token.size() - kSentinelOpen.size() - kSentinelClose.size());
    for (char c : digits) {
        if (c < '0' || c > '9') return false;
    }
    if (k) *k = std::stoi(digits);
    return true;
}

}  // namespace lsap
