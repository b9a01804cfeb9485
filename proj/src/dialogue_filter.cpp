#include "lsap/dialogue_filter.hpp"

#include <algorithm>
#include <stdexcept>

#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

ThresholdPolicy ThresholdPolicy::fixed(double tau) {
    if (tau < 0.0 || tau > 1.0) {
        throw std::invalid_argument("threshold policy: fixed tau must lie in [0,1]");
    }
    return {Kind::fixed, tau};
}

FilterTrainingSet build_filter_training_set(const std::vector<LabeledExample>& multidogo,
                                            const std::vector<LabeledExample>& sgd,
                                            const std::set<std::string>& generic_intents,
                                            const std::set<std::string>& ood_intents,
                                            uint64_t seed) {
    FilterTrainingSet out;
    for (const auto& ex : multidogo) {
        if (ex.intents.empty()) {
            ++out.dropped_no_intent;
            continue;
        }
        bool ood = false, generic = false;
        for (const auto& intent : ex.intents) {
            if (ood_intents.count(intent)) ood = true;
            if (generic_intents.count(intent)) generic = true;
        }
        if (ood) {
            ++out.dropped_out_of_domain;
            continue;
        }
        out.examples.push_back({ex.utterance, !generic});
    }
    for (const auto& ex : sgd) {
        if (ex.intents.empty()) {
            ++out.dropped_no_intent;
            continue;
        }
        bool inform = false, request = false;
        for (const auto& intent : ex.intents) {
            if (intent.find("INFORM") != std::string::npos) inform = true;
            if (intent.find("REQUEST") != std::string::npos) request = true;
        }
        if (inform) {
            out.examples.push_back({ex.utterance, false});
        } else if (request) {
            out.examples.push_back({ex.utterance, true});
        } else {
            ++out.dropped_untagged;
        }
    }
    Rng rng(mix_seed(seed, "filter-train"));
    shuffle_vec(out.examples, rng);
    return out;
}

ClassifierHandlePtr train_intentfulness(ClassifierBackend& backend,
                                        const std::vector<BinaryExample>& training_set,
                                        const ClassifierHyperparams& hp,
                                        ClassifierReport* report) {
    if (training_set.empty()) {
        throw std::invalid_argument("train_intentfulness: empty training set");
    }
    return backend.train(training_set, hp, report);
}

std::vector<ScoredUtterance> score_utterances(const ClassifierBackend& backend,
                                              const ClassifierHandlePtr& handle,
                                              const std::vector<LabeledExample>& utterances) {
    std::vector<std::string> texts;
    texts.reserve(utterances.size());
    for (const auto& ex : utterances) texts.push_back(ex.utterance);
    std::vector<double> probs;
    try {
        probs = backend.predict_proba(handle, texts);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("score_utterances: backend failure: ") + e.what());
    }
    if (probs.size() != utterances.size()) {
        throw std::runtime_error("score_utterances: backend returned " +
                                 std::to_string(probs.size()) + " scores for " +
                                 std::to_string(utterances.size()) + " inputs");
    }
    std::vector<ScoredUtterance> out;
    out.reserve(utterances.size());
    for (size_t i = 0; i < utterances.size(); ++i) {
        if (probs[i] < 0.0 || probs[i] > 1.0) {
            throw std::runtime_error("score_utterances: probability out of range at batch index " +
                                     std::to_string(i));
        }
        out.push_back({utterances[i], probs[i]});
    }
    return out;
}

std::vector<LabeledExample> apply_threshold(const std::vector<ScoredUtterance>& scored,
                                            const ThresholdPolicy& policy) {
    double cutoff = 0.0;
    switch (policy.kind) {
        case ThresholdPolicy::Kind::accept_all_positive:
            cutoff = 0.5;
            break;
        case ThresholdPolicy::Kind::fixed:
            cutoff = policy.tau;
            break;
        case ThresholdPolicy::Kind::median_of_positives: {
            std::vector<double> pos;
            for (const auto& s : scored) {
                if (s.p_intentful >= 0.5) pos.push_back(s.p_intentful);
            }
            if (pos.empty()) {
                throw std::invalid_argument(
                    "apply_threshold: no positively tagged utterances under median policy");
            }
            std::sort(pos.begin(), pos.end());
            const size_t n = pos.size();
            cutoff = (n % 2 == 1) ? pos[n / 2] : 0.5 * (pos[n / 2 - 1] + pos[n / 2]);
            break;
        }
    }
    std::vector<LabeledExample> kept;
    for (const auto& s : scored) {
        if (s.p_intentful >= cutoff) kept.push_back(s.example);
    }
    return kept;
}

std::vector<LabeledExample> draw_audit_sample(const std::vector<LabeledExample>& filtered,
                                              size_t sample_size, uint64_t seed) {
    if (filtered.size() <= sample_size) return filtered;
    Rng rng(mix_seed(seed, "audit-sample"));
    std::vector<size_t> picked = sample_indices(rng, filtered.size(), sample_size);
    std::sort(picked.begin(), picked.end());  // keep corpus order in the emitted sample
    std::vector<LabeledExample> out;
    out.reserve(sample_size);
    for (size_t i : picked) out.push_back(filtered[i]);
    return out;
}

double audit_precision(const std::vector<LabeledExample>& filtered, size_t sample_size,
                       uint64_t seed, const std::map<std::string, bool>& judgments) {
    const std::vector<LabeledExample> sample = draw_audit_sample(filtered, sample_size, seed);
    if (sample.empty()) throw std::invalid_argument("audit_precision: empty sample");
    std::vector<std::string> missing;
    size_t intentful = 0;
    for (const auto& ex : sample) {
        auto it = judgments.find(ex.id);
        if (it == judgments.end()) {
            missing.push_back(ex.id);
        } else if (it->second) {
            ++intentful;
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument("audit_precision: missing judgments for ids: " +
                                    join(missing, ", "));
    }
    return static_cast<double>(intentful) / static_cast<double>(sample.size());
}

}  // namespace lsap
