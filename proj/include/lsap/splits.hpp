#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsap/corpus.hpp"
#include "lsap/intent_text.hpp"

namespace lsap {

inline const std::vector<int> kDefaultShotSizes = {1, 2, 4, 8, 16, 32};

struct FewShotSplitSet {
    uint64_t seed = 0;
    std::vector<int> ks;
    std::map<int, std::vector<LabeledExample>> splits;
};

// For each class a single seeded permutation is drawn; splits[k] takes the
// first min(k, |class|) examples of every class's permutation, so smaller
// splits are prefixes of (hence subsets of) larger splits. Class identity is
// the full joined natural label, so multi-intent combinations form their own
// classes.
FewShotSplitSet make_fewshot_splits(const std::vector<LabeledExample>& train,
                                    const std::vector<int>& ks, uint64_t seed,
                                    const IntentTextConfig& cfg = {});

// One independent split set per seed.
std::vector<FewShotSplitSet> resample_splits(const std::vector<LabeledExample>& train,
                                             const std::vector<int>& ks,
                                             const std::vector<uint64_t>& seeds,
                                             const IntentTextConfig& cfg = {});

// Writes splits/<seed>/k<k>.jsonl under out_dir; returns the written paths.
std::vector<std::string> write_split_files(const FewShotSplitSet& set, const std::string& out_dir);

}  // namespace lsap
