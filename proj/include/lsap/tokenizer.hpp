#pragma once

#include <string>
#include <vector>

namespace lsap {

// Token-level contract required by span noising. detokenize(tokenize(t))
// must equal t up to whitespace normalization, and sentinel(k) must never
// occur in natural text.
class TokenizerContract {
  public:
    virtual ~TokenizerContract() = default;
    virtual std::vector<std::string> tokenize(const std::string& text) const = 0;
    virtual std::string detokenize(const std::vector<std::string>& tokens) const = 0;
    virtual std::string sentinel(int k) const = 0;
    virtual bool is_sentinel(const std::string& token, int* k = nullptr) const = 0;
};

// Whitespace word tokenizer. Sentinels render as "⟨mask_k⟩", which backends
// map onto their reserved vocabulary items.
class WordTokenizer : public TokenizerContract {
  public:
    std::vector<std::string> tokenize(const std::string& text) const override;
    std::string detokenize(const std::vector<std::string>& tokens) const override;
    std::string sentinel(int k) const override;
    bool is_sentinel(const std::string& token, int* k = nullptr) const override;
};

}  // namespace lsap
