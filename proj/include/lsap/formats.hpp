#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsap/corpus.hpp"
#include "lsap/intent_text.hpp"
#include "lsap/tokenizer.hpp"

namespace lsap {

enum class RecordFormat { span_denoise, ic, label_denoise, finetune, label_denoise_ft, joint_icsl };

std::string format_name(RecordFormat f);
std::optional<RecordFormat> format_from_name(const std::string& name);

struct PretrainRecord {
    std::string input;
    std::string target;
    RecordFormat format = RecordFormat::ic;
    std::string source_id;

    bool operator==(const PretrainRecord&) const = default;
};

inline constexpr const char* kTaskPrefix = "intent classification: ";
inline constexpr const char* kParsePrefix = "semantic parse: ";
// Sentence boundary between the utterance and its label in denoising formats.
inline constexpr const char* kLabelSeparator = ". ";

// Concatenates utterance + ". " + label, noises max(1, round(rate*n)) token
// positions (none when rate is 0), merges adjacent positions into spans, and
// emits sentinel-delimited input/target. One record per example; no packing.
PretrainRecord make_span_denoise(const LabeledExample& example, const TokenizerContract& tok,
                                 double noise_rate, uint64_t rng_seed,
                                 const IntentTextConfig& cfg = {});

// Deterministic core of span denoising, exposed for direct testing: noise the
// given token positions (sorted, deduped internally).
PretrainRecord span_denoise_at_positions(const LabeledExample& example,
                                         const TokenizerContract& tok,
                                         std::vector<size_t> positions,
                                         const IntentTextConfig& cfg = {});

// input = utterance + ". " + sentinel(0); target = sentinel(0) + " " + label.
PretrainRecord make_label_denoise(const LabeledExample& example, const TokenizerContract& tok,
                                  const IntentTextConfig& cfg = {});

// input = "intent classification: " + utterance; target = natural label.
PretrainRecord make_ic_record(const LabeledExample& example, const IntentTextConfig& cfg = {});
PretrainRecord make_finetune_record(const LabeledExample& example,
                                    const IntentTextConfig& cfg = {});

// Label denoising construction, tagged for fine-tuning runs.
PretrainRecord make_label_denoise_ft_record(const LabeledExample& example,
                                            const TokenizerContract& tok,
                                            const IntentTextConfig& cfg = {});

// input = "semantic parse: " + utterance; target brackets each slot span as
// "[ text | label ]" and frames the whole utterance with the intent.
PretrainRecord make_joint_icsl_record(const LabeledExample& example,
                                      const IntentTextConfig& cfg = {});

// Formats a whole corpus; per-example noise seeds derive from
// (global_seed, example id) so results are order- and shard-independent.
std::vector<PretrainRecord> format_corpus(const std::vector<LabeledExample>& corpus,
                                          RecordFormat format, const TokenizerContract& tok,
                                          double noise_rate, uint64_t global_seed,
                                          const IntentTextConfig& cfg = {});

void write_records(const std::vector<PretrainRecord>& records, const std::string& path);
std::vector<PretrainRecord> read_records(const std::string& path);

}  // namespace lsap
