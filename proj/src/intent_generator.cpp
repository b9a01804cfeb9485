#include "lsap/intent_generator.hpp"

#include <stdexcept>
#include <unordered_set>

#include "lsap/text_util.hpp"

namespace lsap {

std::vector<PretrainRecord> build_generator_training(
    const std::vector<LabeledExample>& gold_silver, const IntentTextConfig& cfg) {
    std::vector<PretrainRecord> out;
    out.reserve(gold_silver.size());
    for (const auto& ex : gold_silver) {
        if (ex.intents.empty()) {
            throw std::invalid_argument("build_generator_training: example '" + ex.id +
                                        "' is unlabeled; filter corpora first");
        }
        out.push_back(make_ic_record(ex, cfg));
    }
    return out;
}

PseudoLabelResult pseudo_label(const Seq2SeqBackend& backend, const Seq2SeqHandlePtr& handle,
                               const std::vector<LabeledExample>& utterances) {
    std::vector<std::string> inputs;
    inputs.reserve(utterances.size());
    for (const auto& ex : utterances) inputs.push_back(std::string(kTaskPrefix) + ex.utterance);

    std::vector<std::string> generations;
    try {
        generations = backend.generate(handle, inputs);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pseudo_label: backend failure: ") + e.what());
    }
    if (generations.size() != utterances.size()) {
        throw std::runtime_error("pseudo_label: backend returned " +
                                 std::to_string(generations.size()) + " outputs for " +
                                 std::to_string(utterances.size()) + " inputs");
    }

    PseudoLabelResult result;
    result.bronze.reserve(utterances.size());
    for (size_t i = 0; i < utterances.size(); ++i) {
        const std::string label = collapse_whitespace(generations[i]);
        if (label.empty()) {
            ++result.dropped_empty_generation;
            continue;
        }
        LabeledExample ex = utterances[i];
        ex.intents = {label};
        ex.quality = Quality::bronze;
        result.bronze.push_back(std::move(ex));
    }
    return result;
}

double novel_intent_rate(const std::vector<LabeledExample>& generated,
                         const std::set<std::string>& training_intents) {
    if (generated.empty()) {
        throw std::invalid_argument("novel_intent_rate: no generated examples");
    }
    std::unordered_set<std::string> known;
    for (const auto& intent : training_intents) known.insert(normalize_utterance(intent));
    size_t novel = 0;
    for (const auto& ex : generated) {
        if (ex.intents.empty()) {
            throw std::invalid_argument("novel_intent_rate: example '" + ex.id + "' has no intent");
        }
        if (!known.count(normalize_utterance(ex.intents.front()))) ++novel;
    }
    return static_cast<double>(novel) / static_cast<double>(generated.size());
}

}  // namespace lsap
