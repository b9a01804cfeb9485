#include "lsap/ablations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

LabelRemap LabelRemap::inverse() const {
    LabelRemap inv;
    for (const auto& [from, to] : mapping) inv.mapping[to] = from;
    return inv;
}

void LabelRemap::validate() const {
    std::set<std::string> domain, codomain;
    for (const auto& [from, to] : mapping) {
        if (from == to) throw std::invalid_argument("label remap: fixed point at '" + from + "'");
        domain.insert(from);
        codomain.insert(to);
        if (!mapping.count(to)) {
            throw std::invalid_argument("label remap: codomain label '" + to +
                                        "' missing from domain");
        }
    }
    if (domain != codomain) throw std::invalid_argument("label remap: not a bijection");
}

std::vector<LabeledExample> shuffle_pretrain_labels(const std::vector<LabeledExample>& corpus,
                                                    uint64_t seed) {
    std::vector<std::vector<std::string>> intent_lists;
    intent_lists.reserve(corpus.size());
    for (const auto& ex : corpus) {
        if (ex.intents.empty()) {
            throw std::invalid_argument("shuffle_pretrain_labels: example '" + ex.id +
                                        "' is unlabeled");
        }
        intent_lists.push_back(ex.intents);
    }
    Rng rng(mix_seed(seed, "label-shuffle"));
    shuffle_vec(intent_lists, rng);

    std::vector<LabeledExample> out = corpus;
    for (size_t i = 0; i < out.size(); ++i) out[i].intents = std::move(intent_lists[i]);
    return out;
}

namespace {

// Uniform random derangement by rejection: draw uniform permutations until
// one has no fixed points (expected < e tries).
std::vector<size_t> random_derangement(size_t n, Rng& rng) {
    std::vector<size_t> perm(n);
    while (true) {
        for (size_t i = 0; i < n; ++i) perm[i] = i;
        shuffle_vec(perm, rng);
        bool fixed = false;
        for (size_t i = 0; i < n; ++i) {
            if (perm[i] == i) {
                fixed = true;
                break;
            }
        }
        if (!fixed) return perm;
    }
}

}  // namespace

std::vector<LabeledExample> apply_remap(const std::vector<LabeledExample>& corpus,
                                        const LabelRemap& remap) {
    std::vector<LabeledExample> out = corpus;
    for (auto& ex : out) {
        for (auto& intent : ex.intents) {
            auto it = remap.mapping.find(intent);
            if (it == remap.mapping.end()) {
                throw std::invalid_argument("apply_remap: label '" + intent +
                                            "' missing from the remap domain");
            }
            intent = it->second;
        }
    }
    return out;
}

RemapResult remap_eval_labels(const std::vector<LabeledExample>& train,
                              const std::vector<LabeledExample>& test, uint64_t seed) {
    std::set<std::string> label_set;
    for (const auto* corpus : {&train, &test}) {
        for (const auto& ex : *corpus) {
            for (const auto& intent : ex.intents) label_set.insert(intent);
        }
    }
    if (label_set.size() < 2) {
        throw std::invalid_argument(
            "remap_eval_labels: need at least two labels for a derangement");
    }
    std::vector<std::string> labels(label_set.begin(), label_set.end());
    Rng rng(mix_seed(seed, "label-remap"));
    const std::vector<size_t> perm = random_derangement(labels.size(), rng);

    RemapResult result;
    for (size_t i = 0; i < labels.size(); ++i) result.remap.mapping[labels[i]] = labels[perm[i]];
    result.remap.validate();
    result.train = apply_remap(train, result.remap);
    result.test = apply_remap(test, result.remap);
    return result;
}

OverlapCount intent_overlap_report(const std::vector<LabeledExample>& pretrain,
                                   const std::set<std::string>& eval_intents,
                                   const IntentTextConfig& cfg) {
    std::vector<std::string> needles;
    for (const auto& intent : eval_intents) needles.push_back(normalize_utterance(intent));
    OverlapCount out;
    for (const auto& ex : pretrain) {
        if (ex.intents.empty()) continue;
        const std::string label = normalize_utterance(natural_label_for(ex, cfg));
        for (const auto& needle : needles) {
            if (!needle.empty() && label.find(needle) != std::string::npos) {
                ++out.count;
                break;
            }
        }
    }
    out.fraction = pretrain.empty() ? 0.0 : double(out.count) / double(pretrain.size());
    return out;
}

OverlapCount lexical_overlap_report(const std::vector<LabeledExample>& pretrain,
                                    const std::set<std::string>& eval_intents,
                                    const std::set<std::string>& stopwords,
                                    const IntentTextConfig& cfg) {
    std::unordered_set<std::string> stop;
    for (const auto& w : stopwords) stop.insert(to_lower(w));
    std::unordered_set<std::string> eval_words;
    for (const auto& intent : eval_intents) {
        for (const auto& w : split_ws(to_lower(intent))) {
            if (!stop.count(w)) eval_words.insert(w);
        }
    }
    OverlapCount out;
    for (const auto& ex : pretrain) {
        if (ex.intents.empty()) continue;
        const std::string label = to_lower(natural_label_for(ex, cfg));
        for (const auto& w : split_ws(label)) {
            if (!stop.count(w) && eval_words.count(w)) {
                ++out.count;
                break;
            }
        }
    }
    out.fraction = pretrain.empty() ? 0.0 : double(out.count) / double(pretrain.size());
    return out;
}

BagOfWordsEncoder::BagOfWordsEncoder(std::vector<std::string> vocabulary)
    : vocab_(std::move(vocabulary)) {
    for (size_t i = 0; i < vocab_.size(); ++i) index_[to_lower(vocab_[i])] = i;
}

BagOfWordsEncoder BagOfWordsEncoder::from_texts(const std::vector<std::string>& texts) {
    std::set<std::string> words;
    for (const auto& t : texts) {
        for (const auto& w : split_ws(to_lower(t))) words.insert(w);
    }
    return BagOfWordsEncoder(std::vector<std::string>(words.begin(), words.end()));
}

std::vector<std::vector<double>> BagOfWordsEncoder::embed(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::vector<double> vec(vocab_.size(), 0.0);
        for (const auto& w : split_ws(to_lower(t))) {
            auto it = index_.find(w);
            if (it != index_.end()) vec[it->second] += 1.0;
        }
        out.push_back(std::move(vec));
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<SimilarPair> semantic_similarity_report(const SentenceEncoder& encoder,
                                                    const std::vector<std::string>& pretrain_utterances,
                                                    const std::vector<LabeledExample>& eval_set,
                                                    size_t per_intent_sample, size_t top_n,
                                                    uint64_t seed,
                                                    const IntentTextConfig& cfg) {
    // Per-intent sampling of eval utterances.
    std::map<std::string, std::vector<std::string>> by_intent;
    for (const auto& ex : eval_set) {
        if (ex.intents.empty()) continue;
        by_intent[natural_label_for(ex, cfg)].push_back(ex.utterance);
    }
    std::vector<std::string> eval_sample;
    for (const auto& [intent, utterances] : by_intent) {
        Rng rng(mix_seed(seed, "semsim:" + intent));
        const size_t take = std::min(per_intent_sample, utterances.size());
        for (size_t i : sample_indices(rng, utterances.size(), take)) {
            eval_sample.push_back(utterances[i]);
        }
    }
    if (eval_sample.empty() || pretrain_utterances.empty()) return {};

    const auto pre_vecs = encoder.embed(pretrain_utterances);
    const auto eval_vecs = encoder.embed(eval_sample);

    std::vector<SimilarPair> pairs;
    pairs.reserve(pre_vecs.size() * eval_vecs.size());
    for (size_t i = 0; i < pre_vecs.size(); ++i) {
        for (size_t j = 0; j < eval_vecs.size(); ++j) {
            pairs.push_back({pretrain_utterances[i], eval_sample[j],
                             cosine_similarity(pre_vecs[i], eval_vecs[j])});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const SimilarPair& a, const SimilarPair& b) { return a.cosine > b.cosine; });
    if (pairs.size() > top_n) pairs.resize(top_n);
    return pairs;
}

}  // namespace lsap
