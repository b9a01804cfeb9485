#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "lsap/rng_util.hpp"
#include "lsap/splits.hpp"

using namespace lsap;

namespace {

LabeledExample labeled(const std::string& id, const std::string& utt, const std::string& intent) {
    LabeledExample ex;
    ex.id = id;
    ex.utterance = utt;
    ex.intents = {intent};
    ex.quality = Quality::gold;
    ex.source = "t";
    return ex;
}

std::vector<LabeledExample> corpus_with_class_sizes(const std::vector<int>& sizes) {
    std::vector<LabeledExample> out;
    for (size_t c = 0; c < sizes.size(); ++c) {
        for (int i = 0; i < sizes[c]; ++i) {
            out.push_back(labeled("c" + std::to_string(c) + "-" + std::to_string(i),
                                  "utterance " + std::to_string(c) + " " + std::to_string(i),
                                  "Class" + std::to_string(c)));
        }
    }
    return out;
}

std::set<std::string> ids_of(const std::vector<LabeledExample>& v) {
    std::set<std::string> out;
    for (const auto& e : v) out.insert(e.id);
    return out;
}

}  // namespace

TEST_CASE("per-class counts follow min(k, |class|)") {
    auto train = corpus_with_class_sizes({5, 2, 1});
    auto set = make_fewshot_splits(train, {4}, 3);
    CHECK(set.splits.at(4).size() == 7);  // 4 + 2 + 1
}

TEST_CASE("saturating k yields a permutation of the whole train set") {
    auto train = corpus_with_class_sizes({5, 2, 1});
    auto set = make_fewshot_splits(train, {1, 5}, 3);
    CHECK(ids_of(set.splits.at(5)) == ids_of(train));
}

TEST_CASE("multi-intent combinations are their own class") {
    std::vector<LabeledExample> train = corpus_with_class_sizes({3});
    auto multi = labeled("m1", "cheapest fare to boston", "Flight");
    multi.intents = {"Flight", "Airfare"};
    train.push_back(multi);
    auto set = make_fewshot_splits(train, {1}, 0);
    CHECK(set.splits.at(1).size() == 2);  // Class0 plus the Flight#Airfare combo
}

TEST_CASE("degenerate inputs are rejected") {
    auto train = corpus_with_class_sizes({3});
    CHECK_THROWS_AS(make_fewshot_splits({}, {1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_fewshot_splits(train, {}, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_fewshot_splits(train, {2, 2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_fewshot_splits(train, {0, 1}, 0), std::invalid_argument);
    auto unlabeled = train;
    unlabeled.push_back({"u", "no label here", {}, {}, Quality::unlabeled, "t"});
    CHECK_THROWS_AS(make_fewshot_splits(unlabeled, {1}, 0), std::invalid_argument);
}

TEST_CASE("split protocol properties over random corpora") {
    Rng rng(2024);
    const std::vector<int> ks = kDefaultShotSizes;
    for (int trial = 0; trial < 300; ++trial) {
        const int classes = 1 + static_cast<int>(rand_below(rng, 12));
        std::vector<int> sizes;
        size_t total = 0;
        for (int c = 0; c < classes; ++c) {
            sizes.push_back(1 + static_cast<int>(rand_below(rng, 40)));
            total += static_cast<size_t>(sizes.back());
        }
        auto train = corpus_with_class_sizes(sizes);
        const uint64_t seed = rng();
        auto set = make_fewshot_splits(train, ks, seed);

        // Bit-identical reproduction.
        auto set2 = make_fewshot_splits(train, ks, seed);
        for (int k : ks) CHECK(set.splits.at(k) == set2.splits.at(k));

        std::set<std::string> prev;
        for (int k : ks) {
            const auto& split = set.splits.at(k);
            // Cardinality: sum of min(k, class size).
            size_t expect = 0;
            for (int s : sizes) expect += static_cast<size_t>(std::min(k, s));
            CHECK(split.size() == expect);
            // No duplicates within a split.
            const auto ids = ids_of(split);
            CHECK(ids.size() == split.size());
            // Nesting.
            for (const auto& id : prev) CHECK(ids.count(id) == 1);
            prev = ids;
        }
    }
}

TEST_CASE("resample_splits draws independent sets per seed") {
    auto train = corpus_with_class_sizes({30, 30, 30, 30, 30});
    auto sets = resample_splits(train, {1, 2}, {1, 2, 3, 4, 5});
    REQUIRE(sets.size() == 5);
    for (const auto& s : sets) CHECK(s.splits.at(1).size() == 5);

    auto repeat = resample_splits(train, {1, 2}, {1, 2, 3, 4, 5});
    for (size_t i = 0; i < sets.size(); ++i) {
        CHECK(sets[i].splits.at(2) == repeat[i].splits.at(2));
    }
}

TEST_CASE("split files land under <out>/<seed>/k<k>.jsonl") {
    auto train = corpus_with_class_sizes({4, 4});
    auto set = make_fewshot_splits(train, {1, 2}, 9);
    const auto dir = (std::filesystem::temp_directory_path() / "lsap_split_files").string();
    auto paths = write_split_files(set, dir);
    REQUIRE(paths.size() == 2);
    for (const auto& p : paths) {
        CAPTURE(p);
        CHECK(std::filesystem::exists(p));
    }
    CHECK(read_corpus(paths[0]) == set.splits.at(1));
    CHECK(read_corpus(paths[1]) == set.splits.at(2));
}
