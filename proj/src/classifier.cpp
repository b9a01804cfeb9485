#include "lsap/classifier.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

namespace {

struct LinearModel : ClassifierHandle {
    int hash_bits = 18;
    double bias = 0.0;
    std::vector<float> weights;
};

std::vector<uint32_t> featurize(const std::string& text, int hash_bits) {
    const uint32_t mask = (1u << hash_bits) - 1;
    std::vector<std::string> words = split_ws(to_lower(text));
    std::vector<uint32_t> feats;
    feats.reserve(words.size() * 2);
    for (size_t i = 0; i < words.size(); ++i) {
        feats.push_back(static_cast<uint32_t>(fnv1a64(words[i])) & mask);
        if (i + 1 < words.size()) {
            feats.push_back(static_cast<uint32_t>(fnv1a64(words[i] + " " + words[i + 1])) & mask);
        }
    }
    return feats;
}

double predict_one(const LinearModel& m, const std::string& text) {
    double z = m.bias;
    for (uint32_t f : featurize(text, m.hash_bits)) z += m.weights[f];
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

ClassifierHandlePtr HashedLinearClassifier::train(const std::vector<BinaryExample>& data,
                                                  const ClassifierHyperparams& hp,
                                                  ClassifierReport* report) {
    if (data.empty()) throw std::invalid_argument("classifier: empty training set");
    size_t n_pos = 0;
    for (const auto& ex : data) n_pos += ex.positive ? 1 : 0;
    if (n_pos == 0 || n_pos == data.size()) {
        throw std::invalid_argument("classifier: training set contains a single class");
    }

    // Stratified held-out split, deterministic by seed.
    Rng rng(mix_seed(hp.seed, "clf-split"));
    std::vector<size_t> pos_idx, neg_idx;
    for (size_t i = 0; i < data.size(); ++i) (data[i].positive ? pos_idx : neg_idx).push_back(i);
    shuffle_vec(pos_idx, rng);
    shuffle_vec(neg_idx, rng);
    const size_t pos_hold = static_cast<size_t>(pos_idx.size() * hp.held_out_fraction);
    const size_t neg_hold = static_cast<size_t>(neg_idx.size() * hp.held_out_fraction);
    std::vector<size_t> train_idx, hold_idx;
    for (size_t i = 0; i < pos_idx.size(); ++i) (i < pos_hold ? hold_idx : train_idx).push_back(pos_idx[i]);
    for (size_t i = 0; i < neg_idx.size(); ++i) (i < neg_hold ? hold_idx : train_idx).push_back(neg_idx[i]);

    auto model = std::make_shared<LinearModel>();
    model->hash_bits = hash_bits_;
    model->weights.assign(1u << hash_bits_, 0.0f);

    Rng order_rng(mix_seed(hp.seed, "clf-order"));
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_vec(train_idx, order_rng);
        for (size_t i : train_idx) {
            const auto& ex = data[i];
            const double p = predict_one(*model, ex.text);
            const double g = (ex.positive ? 1.0 : 0.0) - p;
            const auto feats = featurize(ex.text, hash_bits_);
            const double step = hp.learning_rate * g;
            model->bias += step;
            for (uint32_t f : feats) model->weights[f] += static_cast<float>(step);
        }
    }

    if (report) {
        report->train_count = train_idx.size();
        report->held_out_count = hold_idx.size();
        size_t correct = 0, pred_pos = 0, true_pos = 0;
        for (size_t i : hold_idx) {
            const bool pred = predict_one(*model, data[i].text) >= 0.5;
            if (pred == data[i].positive) ++correct;
            if (pred) {
                ++pred_pos;
                if (data[i].positive) ++true_pos;
            }
        }
        report->held_out_accuracy = hold_idx.empty() ? 0.0 : double(correct) / hold_idx.size();
        report->held_out_precision = pred_pos == 0 ? 0.0 : double(true_pos) / pred_pos;
    }
    return model;
}

std::vector<double> HashedLinearClassifier::predict_proba(
    const ClassifierHandlePtr& handle, const std::vector<std::string>& texts) const {
    const auto* model = dynamic_cast<const LinearModel*>(handle.get());
    if (!model) throw std::invalid_argument("classifier: invalid handle");
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict_one(*model, t));
    return out;
}

void HashedLinearClassifier::save(const ClassifierHandlePtr& handle,
                                  const std::string& path) const {
    const auto* model = dynamic_cast<const LinearModel*>(handle.get());
    if (!model) throw std::invalid_argument("classifier: invalid handle");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("classifier: cannot write '" + path + "'");
    const char magic[9] = "LSAPCLF1";
    out.write(magic, 8);
    int32_t bits = model->hash_bits;
    double bias = model->bias;
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    out.write(reinterpret_cast<const char*>(&bias), sizeof(bias));
    out.write(reinterpret_cast<const char*>(model->weights.data()),
              static_cast<std::streamsize>(model->weights.size() * sizeof(float)));
}

ClassifierHandlePtr HashedLinearClassifier::load(const std::string& path) const {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("classifier: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (std::string(magic, 8) != "LSAPCLF1") {
        throw std::runtime_error("classifier: '" + path + "' is not a classifier model file");
    }
    auto model = std::make_shared<LinearModel>();
    int32_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
    in.read(reinterpret_cast<char*>(&model->bias), sizeof(model->bias));
    model->hash_bits = bits;
    model->weights.assign(1u << bits, 0.0f);
    in.read(reinterpret_cast<char*>(model->weights.data()),
            static_cast<std::streamsize>(model->weights.size() * sizeof(float)));
    if (!in) throw std::runtime_error("classifier: truncated model file '" + path + "'");
    return model;
}

}  // namespace lsap
