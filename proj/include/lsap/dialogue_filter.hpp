#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lsap/classifier.hpp"
#include "lsap/corpus.hpp"

namespace lsap {

struct ScoredUtterance {
    LabeledExample example;
    double p_intentful = 0.0;  // positive-class probability in [0,1]
};

struct ThresholdPolicy {
    enum class Kind { accept_all_positive, median_of_positives, fixed };
    Kind kind = Kind::accept_all_positive;
    double tau = 0.5;  // used by Kind::fixed only

    static ThresholdPolicy accept_all_positive() { return {Kind::accept_all_positive, 0.0}; }
    static ThresholdPolicy median_of_positives() { return {Kind::median_of_positives, 0.0}; }
    static ThresholdPolicy fixed(double tau);
};

struct FilterTrainingSet {
    std::vector<BinaryExample> examples;  // deterministically shuffled
    uint64_t dropped_no_intent = 0;
    uint64_t dropped_out_of_domain = 0;
    uint64_t dropped_untagged = 0;  // SGD intents with neither INFORM nor REQUEST
};

// Builds the intentfulness training set. MultiDoGO: generic intents are
// negatives, out-of-domain intents dropped, everything else positive. SGD:
// identifiers containing "INFORM" are negatives, "REQUEST" positives
// (case-sensitive uppercase substring match), others dropped.
FilterTrainingSet build_filter_training_set(const std::vector<LabeledExample>& multidogo,
                                            const std::vector<LabeledExample>& sgd,
                                            const std::set<std::string>& generic_intents,
                                            const std::set<std::string>& ood_intents,
                                            uint64_t seed);

ClassifierHandlePtr train_intentfulness(ClassifierBackend& backend,
                                        const std::vector<BinaryExample>& training_set,
                                        const ClassifierHyperparams& hp,
                                        ClassifierReport* report = nullptr);

std::vector<ScoredUtterance> score_utterances(const ClassifierBackend& backend,
                                              const ClassifierHandlePtr& handle,
                                              const std::vector<LabeledExample>& utterances);

// Keeps "positively tagged" (p >= 0.5) utterances under accept_all_positive;
// keeps p >= median of the positively tagged subset under median_of_positives
// (ties at the median retained); keeps p >= tau under fixed.
std::vector<LabeledExample> apply_threshold(const std::vector<ScoredUtterance>& scored,
                                            const ThresholdPolicy& policy);

// Reproducible uniform sample (without replacement) for the manual audit;
// clamps to the whole set when it is smaller than sample_size.
std::vector<LabeledExample> draw_audit_sample(const std::vector<LabeledExample>& filtered,
                                              size_t sample_size, uint64_t seed);

// Fraction of the drawn sample judged intentful. Throws when any sampled id
// lacks a judgment, listing the missing ids.
double audit_precision(const std::vector<LabeledExample>& filtered, size_t sample_size,
                       uint64_t seed, const std::map<std::string, bool>& judgments);

}  // namespace lsap
