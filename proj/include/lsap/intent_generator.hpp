#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lsap/corpus.hpp"
#include "lsap/formats.hpp"
#include "lsap/seq2seq_backend.hpp"

namespace lsap {

// Training pairs for the seq2seq intent labeler:
// "intent classification: <utterance>" -> natural label.
std::vector<PretrainRecord> build_generator_training(
    const std::vector<LabeledExample>& gold_silver, const IntentTextConfig& cfg = {});

struct PseudoLabelResult {
    std::vector<LabeledExample> bronze;
    uint64_t dropped_empty_generation = 0;
};

// Greedy-decodes an intent for each utterance; outputs carry quality=bronze
// and exactly one intent (the generated label string). Empty generations are
// dropped with a count.
PseudoLabelResult pseudo_label(const Seq2SeqBackend& backend, const Seq2SeqHandlePtr& handle,
                               const std::vector<LabeledExample>& utterances);

// Fraction of generated examples whose intent (case-insensitive,
// whitespace-normalized) does not occur in training_intents.
double novel_intent_rate(const std::vector<LabeledExample>& generated,
                         const std::set<std::string>& training_intents);

}  // namespace lsap
