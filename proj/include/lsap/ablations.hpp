#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lsap/corpus.hpp"
#include "lsap/intent_text.hpp"

namespace lsap {

// Bijection over the dataset's label set with no fixed points.
struct LabelRemap {
    std::map<std::string, std::string> mapping;

    LabelRemap inverse() const;
    void validate() const;  // bijective, derangement, domain == codomain
};

struct OverlapCount {
    uint64_t count = 0;
    double fraction = 0.0;
};

struct SimilarPair {
    std::string pretrain_utterance;
    std::string eval_utterance;
    double cosine = 0.0;
};

struct OverlapReport {
    OverlapCount exact_or_substring;
    OverlapCount lexical;
    std::vector<SimilarPair> top_similar;  // sorted descending by cosine
};

// Uniform permutation of the intent lists across examples; utterance order
// and the intent multiset are preserved exactly.
std::vector<LabeledExample> shuffle_pretrain_labels(const std::vector<LabeledExample>& corpus,
                                                    uint64_t seed);

struct RemapResult {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
    LabelRemap remap;
};

// Draws a uniform random derangement over the union of intent identifiers in
// train+test and applies it to both sets.
RemapResult remap_eval_labels(const std::vector<LabeledExample>& train,
                              const std::vector<LabeledExample>& test, uint64_t seed);

std::vector<LabeledExample> apply_remap(const std::vector<LabeledExample>& corpus,
                                        const LabelRemap& remap);

// Pre-train examples whose natural label equals an eval intent or contains
// one as a substring (case-insensitive).
OverlapCount intent_overlap_report(const std::vector<LabeledExample>& pretrain,
                                   const std::set<std::string>& eval_intents,
                                   const IntentTextConfig& cfg = {});

// Pre-train examples whose natural label shares >= 1 (lowercased, whitespace
// token) word with any eval intent; stopwords removed from both sides.
OverlapCount lexical_overlap_report(const std::vector<LabeledExample>& pretrain,
                                    const std::set<std::string>& eval_intents,
                                    const std::set<std::string>& stopwords = {},
                                    const IntentTextConfig& cfg = {});

// Sentence embedding contract used by the semantic overlap analysis.
class SentenceEncoder {
  public:
    virtual ~SentenceEncoder() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
};

// Deterministic test double / default encoder: counts of a fixed word
// vocabulary. Cosines over these vectors are hand-checkable.
class BagOfWordsEncoder : public SentenceEncoder {
  public:
    explicit BagOfWordsEncoder(std::vector<std::string> vocabulary);
    static BagOfWordsEncoder from_texts(const std::vector<std::string>& texts);
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

  private:
    std::vector<std::string> vocab_;
    std::map<std::string, size_t> index_;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Samples per_intent_sample utterances per eval intent (seeded, clamped to
// class size), embeds both sides, and returns the top_n most similar
// (pretrain, eval) pairs sorted descending by cosine.
std::vector<SimilarPair> semantic_similarity_report(const SentenceEncoder& encoder,
                                                    const std::vector<std::string>& pretrain_utterances,
                                                    const std::vector<LabeledExample>& eval_set,
                                                    size_t per_intent_sample, size_t top_n,
                                                    uint64_t seed,
                                                    const IntentTextConfig& cfg = {});

}  // namespace lsap
