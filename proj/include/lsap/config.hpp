#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lsap/dialogue_filter.hpp"
#include "lsap/intent_text.hpp"
#include "lsap/runner.hpp"
#include "lsap/seq2seq_tiny.hpp"

namespace lsap {

// Declarative pipeline configuration. Loaded from a single JSON document;
// command-line flags override individual fields. Unknown keys are rejected
// so typos fail loudly.
struct PipelineConfig {
    IntentTextConfig intent_text;

    std::set<std::string> filter_generic_intents;
    std::set<std::string> filter_ood_intents;
    ThresholdPolicy filter_policy = ThresholdPolicy::accept_all_positive();

    double format_noise_rate = 0.15;
    uint64_t format_seed = 0;

    std::vector<int> split_ks = kDefaultShotSizes;
    std::vector<uint64_t> finetune_seeds = {1, 2, 3, 4, 5};
    uint64_t split_seed = 7;

    PretrainOverride pretrain_hp;
    double finetune_lr = kFinetuneLearningRate;
    int finetune_batch = kFinetuneBatchSize;
    int finetune_base_epochs = kFinetuneBaseEpochs;

    TinySeq2SeqOptions backend;

    static PipelineConfig load(const std::string& path);
    void validate() const;  // throws std::invalid_argument naming the offending key
};

ThresholdPolicy threshold_policy_from_string(const std::string& spec);

}  // namespace lsap
