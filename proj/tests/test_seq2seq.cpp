#include <doctest.h>

#include <filesystem>

#include "lsap/seq2seq_tiny.hpp"

using namespace lsap;

namespace {

TinySeq2SeqOptions tiny_options() {
    TinySeq2SeqOptions opt;
    opt.d_model = 32;
    opt.n_heads = 2;
    opt.enc_layers = 1;
    opt.dec_layers = 1;
    opt.max_src_len = 24;
    opt.max_tgt_len = 12;
    opt.max_gen_len = 8;
    opt.threads = 2;
    return opt;
}

std::vector<PretrainRecord> toy_records() {
    // A tiny closed-world task: map a color-coded request to its label.
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"intent classification: please book a red thing", "Book red"},
        {"intent classification: please book a blue thing", "Book blue"},
        {"intent classification: please cancel a red thing", "Cancel red"},
        {"intent classification: please cancel a blue thing", "Cancel blue"},
        {"intent classification: please find a green thing", "Find green"},
        {"intent classification: please find a red thing", "Find red"},
        {"intent classification: please book a green thing", "Book green"},
        {"intent classification: please cancel a green thing", "Cancel green"},
    };
    std::vector<PretrainRecord> records;
    for (size_t i = 0; i < pairs.size(); ++i) {
        records.push_back({pairs[i].first, pairs[i].second, RecordFormat::ic,
                           "toy-" + std::to_string(i)});
    }
    return records;
}

}  // namespace

TEST_CASE("training is reproducible for equal records, hyperparams, and seed") {
    TinyTransformerBackend backend(tiny_options());
    Hyperparams hp;
    hp.learning_rate = 3e-3;
    hp.batch_size = 4;
    hp.epochs = 30;
    hp.seed = 11;
    auto records = toy_records();
    auto h1 = backend.train(records, hp);
    auto h2 = backend.train(records, hp);

    std::vector<std::string> probes;
    for (const auto& r : records) probes.push_back(r.input);
    const auto g1 = backend.generate(h1, probes);
    const auto g2 = backend.generate(h2, probes);
    CHECK(g1 == g2);
    CHECK(backend.generate(h1, probes) == g1);  // generate itself is deterministic

    CHECK(backend.stats(h1).steps > 0);
    CHECK(backend.stats(h1).final_loss == doctest::Approx(backend.stats(h2).final_loss));
}

TEST_CASE("thread count does not change training results") {
    auto opt_single = tiny_options();
    opt_single.threads = 1;
    auto opt_multi = tiny_options();
    opt_multi.threads = 2;
    TinyTransformerBackend single(opt_single), multi(opt_multi);
    Hyperparams hp;
    hp.learning_rate = 3e-3;
    hp.batch_size = 8;
    hp.epochs = 10;
    hp.seed = 5;
    auto records = toy_records();
    auto hs = single.train(records, hp);
    auto hm = multi.train(records, hp);
    CHECK(single.stats(hs).final_loss == doctest::Approx(multi.stats(hm).final_loss));
    std::vector<std::string> probes = {records[0].input, records[3].input};
    CHECK(single.generate(hs, probes) == multi.generate(hm, probes));
}

TEST_CASE("a tiny model memorizes a toy training set") {
    TinyTransformerBackend backend(tiny_options());
    Hyperparams hp;
    hp.learning_rate = 3e-3;
    hp.batch_size = 4;
    hp.epochs = 60;
    hp.seed = 1;
    auto records = toy_records();
    auto handle = backend.train(records, hp);
    // Train further until the loss plateaus.
    for (int round = 0; round < 4 && backend.stats(handle).final_loss > 0.05; ++round) {
        Hyperparams more = hp;
        more.epochs = 40;
        more.seed = hp.seed + round + 1;
        handle = backend.train(records, more, handle);
    }
    std::vector<std::string> probes;
    for (const auto& r : records) probes.push_back(r.input);
    const auto outputs = backend.generate(handle, probes);
    int exact = 0;
    for (size_t i = 0; i < records.size(); ++i) exact += (outputs[i] == records[i].target);
    CHECK(exact >= static_cast<int>(records.size()) - 1);
}

TEST_CASE("save/load round-trips generation behavior") {
    TinyTransformerBackend backend(tiny_options());
    Hyperparams hp;
    hp.learning_rate = 3e-3;
    hp.batch_size = 4;
    hp.epochs = 20;
    hp.seed = 9;
    auto handle = backend.train(toy_records(), hp);
    const auto path = (std::filesystem::temp_directory_path() / "lsap_s2s_roundtrip.bin").string();
    backend.save(handle, path);
    auto reloaded = backend.load(path);

    std::vector<std::string> probes = {"intent classification: please book a red thing",
                                       "intent classification: please find a green thing"};
    CHECK(backend.generate(reloaded, probes) == backend.generate(handle, probes));
    CHECK(backend.stats(reloaded).steps == backend.stats(handle).steps);
    CHECK(TinyTransformerBackend::parameter_count(reloaded) ==
          TinyTransformerBackend::parameter_count(handle));
}

TEST_CASE("fine-tuning from a base keeps the vocabulary and maps OOV to unk") {
    TinyTransformerBackend backend(tiny_options());
    Hyperparams hp;
    hp.learning_rate = 3e-3;
    hp.batch_size = 4;
    hp.epochs = 10;
    hp.seed = 2;
    auto base = backend.train(toy_records(), hp);

    std::vector<PretrainRecord> ft = {
        {"intent classification: please book a purple thing", "Book red", RecordFormat::finetune,
         "ft-0"}};
    Hyperparams ft_hp;
    ft_hp.learning_rate = 1e-3;
    ft_hp.batch_size = 1;
    ft_hp.epochs = 3;
    ft_hp.seed = 3;
    auto tuned = backend.train(ft, ft_hp, base);
    const auto out = backend.generate(tuned, {"intent classification: please book a purple thing"});
    REQUIRE(out.size() == 1);  // OOV "purple" must not crash; output is some string
}

TEST_CASE("degenerate inputs are rejected") {
    TinyTransformerBackend backend(tiny_options());
    Hyperparams hp;
    CHECK_THROWS_AS(backend.train({}, hp), std::invalid_argument);
    Hyperparams bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(backend.train(toy_records(), bad), std::invalid_argument);
    CHECK_THROWS_AS(TinyTransformerBackend(TinySeq2SeqOptions{.d_model = 10, .n_heads = 3}),
                    std::invalid_argument);
}
