#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lsap/corpus.hpp"
#include "lsap/rng_util.hpp"

using namespace lsap;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("lsap_corpus_test_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
}

LabeledExample make_example(const std::string& id, const std::string& utt,
                            std::vector<std::string> intents, Quality q) {
    LabeledExample ex;
    ex.id = id;
    ex.utterance = utt;
    ex.intents = std::move(intents);
    ex.quality = q;
    ex.source = "test";
    return ex;
}

}  // namespace

TEST_CASE("ingest maps fields and synthesizes ids") {
    const fs::path dir = temp_dir();
    const fs::path raw = dir / "raw.jsonl";
    write_lines(raw, {R"({"text":"book me a flight","label":"BookFlight"})",
                      R"({"body":"ignored, no utterance key"})",
                      R"({"text":"what a great game"})"});

    auto result = ingest_generic_jsonl(raw.string(), {{"utterance", "text"}, {"intent", "label"}},
                                       "unit");
    REQUIRE(result.examples.size() == 2);
    CHECK(result.skipped_missing_utterance == 1);
    CHECK(result.examples[0].utterance == "book me a flight");
    CHECK(result.examples[0].intents == std::vector<std::string>{"BookFlight"});
    CHECK(result.examples[0].quality == Quality::gold);
    CHECK(result.examples[0].id == "unit-000000");
    CHECK(result.examples[1].intents.empty());
    CHECK(result.examples[1].quality == Quality::unlabeled);
    CHECK(result.examples[1].id == "unit-000001");
}

TEST_CASE("ingest skips malformed lines but fails on systemic mismatch") {
    const fs::path dir = temp_dir();
    const fs::path raw = dir / "raw.jsonl";
    write_lines(raw, {R"({"text":"one"})", "{{{not json", R"({"text":"two"})"});
    auto result = ingest_generic_jsonl(raw.string(), {{"utterance", "text"}}, "unit");
    CHECK(result.examples.size() == 2);
    CHECK(result.skipped_malformed == 1);

    const fs::path bad = dir / "bad.jsonl";
    std::vector<std::string> lines(25, "oops not json");
    for (int i = 0; i < 5; ++i) lines.push_back(R"({"text":"ok"})");
    write_lines(bad, lines);
    CHECK_THROWS_AS(ingest_generic_jsonl(bad.string(), {{"utterance", "text"}}, "unit"),
                    std::runtime_error);
}

TEST_CASE("ingest splits '#'-joined intents and is deterministic") {
    const fs::path dir = temp_dir();
    const fs::path raw = dir / "raw.jsonl";
    write_lines(raw, {R"({"text":"cheapest fare","label":"atis_flight#atis_airfare"})"});
    auto a = ingest_generic_jsonl(raw.string(), {{"utterance", "text"}, {"intent", "label"}}, "u");
    auto b = ingest_generic_jsonl(raw.string(), {{"utterance", "text"}, {"intent", "label"}}, "u");
    REQUIRE(a.examples.size() == 1);
    CHECK(a.examples[0].intents == std::vector<std::string>{"atis_flight", "atis_airfare"});
    CHECK(a.examples == b.examples);
}

TEST_CASE("ingest requires an utterance mapping") {
    CHECK_THROWS_AS(ingest_generic_jsonl("/nonexistent", {{"intent", "label"}}, "u"),
                    std::invalid_argument);
    CHECK_THROWS_AS(ingest_generic_jsonl("/nonexistent", {{"utterance", "text"}}, "u"),
                    std::runtime_error);
}

TEST_CASE("dedupe removes normalized matches, keeps internal duplicates") {
    std::vector<LabeledExample> corpus = {
        make_example("a", "Book a flight", {"X"}, Quality::gold),
        make_example("b", "unrelated", {"X"}, Quality::gold),
        make_example("c", "unrelated", {"X"}, Quality::gold),
    };
    std::vector<std::vector<LabeledExample>> evals = {
        {make_example("e", "book a  flight", {"Y"}, Quality::gold)}};

    auto result = dedupe_against_eval(corpus, evals);
    CHECK(result.removed == 1);
    REQUIRE(result.kept.size() == 2);
    CHECK(result.kept[0].id == "b");
    CHECK(result.kept[1].id == "c");

    SUBCASE("idempotent and order preserving") {
        auto again = dedupe_against_eval(result.kept, evals);
        CHECK(again.removed == 0);
        CHECK(again.kept == result.kept);
    }
    SUBCASE("disjoint corpora untouched") {
        auto untouched = dedupe_against_eval(corpus, {{make_example("z", "zzz", {}, Quality::unlabeled)}});
        CHECK(untouched.removed == 0);
        CHECK(untouched.kept == corpus);
    }
}

TEST_CASE("corpus round trip preserves every field") {
    const fs::path dir = temp_dir();
    std::vector<LabeledExample> corpus;
    Rng rng(42);
    const std::vector<Quality> tiers = {Quality::gold, Quality::silver, Quality::bronze};
    for (int i = 0; i < 100; ++i) {
        LabeledExample ex;
        ex.id = "ex-" + std::to_string(i);
        ex.utterance = "utterance number " + std::to_string(i) + " with words";
        if (i % 7 == 0) {
            ex.quality = Quality::unlabeled;
        } else {
            ex.quality = tiers[rand_below(rng, 3)];
            ex.intents = {"Intent" + std::to_string(rand_below(rng, 10))};
            if (i % 5 == 0) ex.intents.push_back("Extra");
        }
        if (i % 11 == 0) ex.slots.push_back({0, 9, "head"});
        ex.source = "roundtrip";
        corpus.push_back(ex);
    }
    const std::string path = (dir / "corpus.jsonl").string();
    CorpusManifest manifest = write_corpus(corpus, path);
    CHECK(manifest.count == corpus.size());
    uint64_t histo_total = 0;
    for (const auto& [q, n] : manifest.quality_histogram) histo_total += n;
    CHECK(histo_total == corpus.size());
    CHECK(manifest.checksum == file_checksum(path));
    CHECK(fs::exists(manifest_path_for(path)));

    const auto reread = read_corpus(path);
    CHECK(reread == corpus);
}

TEST_CASE("empty corpus writes empty file with zero-count manifest") {
    const fs::path dir = temp_dir();
    const std::string path = (dir / "empty.jsonl").string();
    CorpusManifest manifest = write_corpus({}, path);
    CHECK(manifest.count == 0);
    CHECK(read_corpus(path).empty());
}

TEST_CASE("read rejects invalid quality naming the line") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "bad.jsonl";
    write_lines(path,
                {R"({"id":"1","utterance":"ok","intents":["A"],"quality":"gold","source":"s"})",
                 R"({"id":"2","utterance":"ok","intents":["A"],"quality":"platinum","source":"s"})"});
    try {
        read_corpus(path.string());
        FAIL("expected a schema error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("validate rejects inconsistent examples") {
    CHECK_THROWS(make_example("x", "   ", {"A"}, Quality::gold).validate());
    CHECK_THROWS(make_example("x", "ok", {}, Quality::gold).validate());
    CHECK_THROWS(make_example("x", "ok", {"A"}, Quality::unlabeled).validate());
    auto overlapping = make_example("x", "zero one two", {"A"}, Quality::gold);
    overlapping.slots = {{0, 6, "a"}, {4, 8, "b"}};
    CHECK_THROWS(overlapping.validate());
    auto out_of_bounds = make_example("x", "short", {"A"}, Quality::gold);
    out_of_bounds.slots = {{0, 99, "a"}};
    CHECK_THROWS(out_of_bounds.validate());
}
