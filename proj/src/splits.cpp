#include "lsap/splits.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "lsap/rng_util.hpp"

namespace lsap {

FewShotSplitSet make_fewshot_splits(const std::vector<LabeledExample>& train,
                                    const std::vector<int>& ks, uint64_t seed,
                                    const IntentTextConfig& cfg) {
    if (train.empty()) throw std::invalid_argument("make_fewshot_splits: empty training set");
    if (ks.empty()) throw std::invalid_argument("make_fewshot_splits: no split sizes given");
    for (size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] <= 0 || (i > 0 && ks[i] <= ks[i - 1])) {
            throw std::invalid_argument(
                "make_fewshot_splits: split sizes must be strictly increasing and positive");
        }
    }

    // Group by class, preserving corpus order within each class.
    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < train.size(); ++i) {
        if (train[i].intents.empty()) {
            throw std::invalid_argument("make_fewshot_splits: example '" + train[i].id +
                                        "' is unlabeled");
        }
        by_class[natural_label_for(train[i], cfg)].push_back(i);
    }

    // One permutation per class, seeded independently of other classes so that
    // adding a class never perturbs the rest.
    for (auto& [label, indices] : by_class) {
        Rng rng(mix_seed(seed, "split:" + label));
        shuffle_vec(indices, rng);
    }

    FewShotSplitSet out;
    out.seed = seed;
    out.ks = ks;
    for (int k : ks) {
        std::vector<LabeledExample> split;
        for (const auto& [label, indices] : by_class) {
            const size_t take = std::min<size_t>(static_cast<size_t>(k), indices.size());
            for (size_t i = 0; i < take; ++i) split.push_back(train[indices[i]]);
        }
        out.splits[k] = std::move(split);
    }
    return out;
}

std::vector<FewShotSplitSet> resample_splits(const std::vector<LabeledExample>& train,
                                             const std::vector<int>& ks,
                                             const std::vector<uint64_t>& seeds,
                                             const IntentTextConfig& cfg) {
    std::vector<FewShotSplitSet> out;
    out.reserve(seeds.size());
    for (uint64_t s : seeds) out.push_back(make_fewshot_splits(train, ks, s, cfg));
    return out;
}

std::vector<std::string> write_split_files(const FewShotSplitSet& set,
                                           const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(out_dir) / std::to_string(set.seed);
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& [k, examples] : set.splits) {
        const std::string path = (dir / ("k" + std::to_string(k) + ".jsonl")).string();
        write_corpus(examples, path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace lsap
