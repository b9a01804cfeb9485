#include <doctest.h>

#include <map>

#include "lsap/intent_generator.hpp"

using namespace lsap;

namespace {

LabeledExample labeled(const std::string& id, const std::string& utt,
                       std::vector<std::string> intents) {
    LabeledExample ex;
    ex.id = id;
    ex.utterance = utt;
    ex.intents = std::move(intents);
    ex.quality = ex.intents.empty() ? Quality::unlabeled : Quality::gold;
    ex.source = "t";
    return ex;
}

// Canned backend: deterministic "generation" table keyed by input text.
class FakeBackend : public Seq2SeqBackend {
  public:
    std::map<std::string, std::string> table;

    Seq2SeqHandlePtr train(const std::vector<PretrainRecord>&, const Hyperparams&,
                           const Seq2SeqHandlePtr&) override {
        struct H : Seq2SeqHandle {};
        return std::make_shared<H>();
    }
    std::vector<std::string> generate(const Seq2SeqHandlePtr&,
                                      const std::vector<std::string>& inputs) const override {
        std::vector<std::string> out;
        for (const auto& in : inputs) {
            auto it = table.find(in);
            out.push_back(it == table.end() ? "" : it->second);
        }
        return out;
    }
    const TokenizerContract& tokenizer() const override { return tok_; }
    TrainStats stats(const Seq2SeqHandlePtr&) const override { return {}; }
    void save(const Seq2SeqHandlePtr&, const std::string&) const override {}
    Seq2SeqHandlePtr load(const std::string&) const override { return nullptr; }

  private:
    WordTokenizer tok_;
};

}  // namespace

TEST_CASE("generator training pairs use the task prefix and natural labels") {
    IntentTextConfig cfg;
    cfg.strip_prefixes = {"atis_"};
    std::vector<LabeledExample> corpus = {
        labeled("a", "Find me a hotel in NYC", {"BookHotel"}),
        labeled("b", "cheapest fare", {"atis_flight", "atis_airfare"}),
    };
    auto pairs = build_generator_training(corpus, cfg);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].input == "intent classification: Find me a hotel in NYC");
    CHECK(pairs[0].target == "Book hotel");
    CHECK(pairs[1].target == "Flight # airfare");
    CHECK(pairs[0].source_id == "a");

    CHECK(build_generator_training({}, cfg).empty());
    CHECK_THROWS_AS(build_generator_training({labeled("u", "no label", {})}, cfg),
                    std::invalid_argument);
}

TEST_CASE("pseudo labeling emits bronze examples and drops empty generations") {
    FakeBackend backend;
    backend.table["intent classification: buy tickets for the game"] = "Buy tickets";
    backend.table["intent classification: is it raining"] = "Check weather";
    // The third input is missing from the table -> empty generation.
    std::vector<LabeledExample> utts = {
        labeled("u1", "buy tickets for the game", {}),
        labeled("u2", "is it raining", {}),
        labeled("u3", "mystery", {}),
    };
    auto result = pseudo_label(backend, nullptr, utts);
    CHECK(result.dropped_empty_generation == 1);
    REQUIRE(result.bronze.size() == 2);
    for (const auto& ex : result.bronze) {
        CHECK(ex.quality == Quality::bronze);
        CHECK(ex.intents.size() == 1);
        CHECK(ex.source == "t");
    }
    CHECK(result.bronze[0].id == "u1");
    CHECK(result.bronze[0].intents[0] == "Buy tickets");

    auto again = pseudo_label(backend, nullptr, utts);
    CHECK(again.bronze == result.bronze);
}

TEST_CASE("novel intent rate normalizes case and whitespace") {
    std::vector<LabeledExample> generated = {
        labeled("g1", "u", {"Buy tickets"}),
        labeled("g2", "u", {"buy  tickets"}),   // same intent after normalization
        labeled("g3", "u", {"Find a job in the UK"}),
        labeled("g4", "u", {"Check weather"}),
    };
    const std::set<std::string> training = {"Buy tickets", "Check weather"};
    CHECK(novel_intent_rate(generated, training) == doctest::Approx(0.25));

    SUBCASE("37 novel of 100") {
        std::vector<LabeledExample> batch;
        for (int i = 0; i < 100; ++i) {
            batch.push_back(labeled("b" + std::to_string(i), "u",
                                    {i < 37 ? "Novel intent " + std::to_string(i) : "Known"}));
        }
        CHECK(novel_intent_rate(batch, {"Known"}) == doctest::Approx(0.37));
    }
    SUBCASE("all known yields zero") {
        CHECK(novel_intent_rate({labeled("g", "u", {"Known"})}, {"known"}) == doctest::Approx(0.0));
    }
    SUBCASE("2 novel of 4") {
        std::vector<LabeledExample> four = {
            labeled("a", "u", {"A"}), labeled("b", "u", {"B"}),
            labeled("c", "u", {"C"}), labeled("d", "u", {"D"})};
        CHECK(novel_intent_rate(four, {"A", "B"}) == doctest::Approx(0.5));
    }
    SUBCASE("empty generated list is an error, not zero") {
        CHECK_THROWS_AS(novel_intent_rate({}, {"A"}), std::invalid_argument);
    }
}
