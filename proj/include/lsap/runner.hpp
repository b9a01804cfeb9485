#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsap/ablations.hpp"
#include "lsap/corpus.hpp"
#include "lsap/formats.hpp"
#include "lsap/seq2seq_backend.hpp"
#include "lsap/splits.hpp"

namespace lsap {

// ---- defaults (secondary pre-training / fine-tuning) ----
inline constexpr double kPretrainLearningRate = 5e-4;
inline constexpr int kPretrainBatchSize = 128;
inline constexpr int kPretrainEpochs = 3;
inline constexpr double kFinetuneLearningRate = 5e-4;
inline constexpr int kFinetuneBatchSize = 1;
inline constexpr int kFinetuneBaseEpochs = 2;

struct PretrainOverride {
    std::optional<double> learning_rate;
    std::optional<int> batch_size;
    std::optional<int> epochs;
    uint64_t seed = 0;
};

struct RunManifest {
    std::string records_checksum;
    Hyperparams hp;
    std::string note;

    std::string key() const;  // content hash for caching
    void write(const std::string& path) const;
};

std::string records_checksum(const std::vector<PretrainRecord>& records);

struct PretrainResult {
    Seq2SeqHandlePtr handle;
    RunManifest manifest;
};

PretrainResult pretrain(Seq2SeqBackend& backend, const std::vector<PretrainRecord>& records,
                        const PretrainOverride& hp_override = {});

// Tuning epochs double for each halving of the split size relative to k_max,
// keeping the number of tuning steps roughly constant; rounds up.
int epochs_for_split(int base_epochs, int k_max, int k);

struct FinetuneSchedule {
    double learning_rate = kFinetuneLearningRate;
    int batch_size = kFinetuneBatchSize;
    int base_epochs = kFinetuneBaseEpochs;
    int k_max = 32;
    int k = 32;
    uint64_t seed = 0;
};

// base == nullptr fine-tunes from scratch (the no-pretrain baseline).
Seq2SeqHandlePtr finetune(Seq2SeqBackend& backend, const Seq2SeqHandlePtr& base,
                          const std::vector<LabeledExample>& split, RecordFormat format,
                          const FinetuneSchedule& schedule, const IntentTextConfig& cfg = {});

std::vector<std::string> predict_intents(const Seq2SeqBackend& backend,
                                         const Seq2SeqHandlePtr& handle,
                                         const std::vector<LabeledExample>& test);

// Confusion counts keyed by (gold label, predicted label); predictions outside
// the gold label set collapse into the epsilon bucket.
inline const std::string kEpsilonBucket = "ε";
using Confusion = std::map<std::pair<std::string, std::string>, uint64_t>;

std::pair<double, Confusion> evaluate_ic(const std::vector<std::string>& preds,
                                         const std::vector<std::string>& golds);

// Micro-averaged span F1 over exact (text, label) pairs parsed back from the
// bracket grammar; unparseable predictions contribute zero true positives.
double evaluate_sl(const std::vector<std::string>& pred_parses,
                   const std::vector<LabeledExample>& gold);

// Exposed for tests: slots parsed from one bracketed prediction.
std::vector<std::pair<std::string, std::string>> parse_bracketed_slots(const std::string& text);

// Arithmetic mean and population standard deviation.
std::pair<double, double> aggregate_seeds(const std::map<uint64_t, double>& per_seed);

struct EvalReport {
    std::map<uint64_t, double> per_seed_accuracy;
    double mean = 0.0;
    double stddev = 0.0;  // population
    Confusion confusion;  // accumulated over seeds
};

struct ExperimentConfig {
    std::string train_path;
    std::string test_path;
    std::string pretrain_corpus_path;  // empty -> no pre-training stage
    RecordFormat pretrain_format = RecordFormat::label_denoise;
    double noise_rate = 0.15;
    uint64_t format_seed = 0;

    std::string out_dir;
    std::vector<int> ks = kDefaultShotSizes;
    std::vector<uint64_t> finetune_seeds = {1, 2, 3, 4, 5};
    uint64_t split_seed = 7;
    RecordFormat finetune_format = RecordFormat::finetune;

    PretrainOverride pretrain_hp;
    double finetune_lr = kFinetuneLearningRate;
    int finetune_batch = kFinetuneBatchSize;
    int finetune_base_epochs = kFinetuneBaseEpochs;

    bool shuffle_pretrain = false;
    uint64_t shuffle_seed = 0;
    bool remap_eval = false;
    uint64_t remap_seed = 0;

    IntentTextConfig intent_text;
};

struct ExperimentReport {
    std::map<int, EvalReport> by_k;
    std::vector<std::string> failed_cells;  // "seed=<s> k=<k>: <error>"
    std::optional<LabelRemap> used_remap;
    std::string pretrain_manifest_key;  // empty when no pre-training ran
};

// Runs the full grid (finetune seeds x split sizes). Each cell is cached
// under out_dir/cells and skipped on reruns with an unchanged key; a failing
// cell is recorded and the grid continues.
ExperimentReport run_experiment(Seq2SeqBackend& backend, const ExperimentConfig& config);

void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace lsap
