// End-to-end smoke test for the lsap binary: drives a miniature pipeline
// through the real subcommands and checks artifacts and exit codes.
// The binary path arrives via LSAP_CLI_PATH from CMake.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lsap/corpus.hpp"
#include "lsap/formats.hpp"

#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lsap;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cout << "FAILED: " << what << "\n";
    }
}

int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main() {
    const std::string cli = LSAP_CLI_PATH;
    const fs::path dir = fs::temp_directory_path() / "lsap_cli_smoke";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto p = [&dir](const std::string& name) { return (dir / name).string(); };

    // Raw dump for ingest.
    {
        std::ofstream raw(p("raw.jsonl"));
        raw << R"({"text":"book me a flight to boston","label":"BookFlight"})" << "\n";
        raw << R"({"text":"please cancel my hotel","label":"CancelHotel"})" << "\n";
        raw << R"({"text":"what a lovely day"})" << "\n";
    }
    expect(run(cli + " ingest --in " + p("raw.jsonl") +
               " --map utterance=text,intent=label --source smoke --out " + p("corpus.jsonl") +
               " > /dev/null") == 0,
           "ingest should succeed");
    expect(read_corpus(p("corpus.jsonl")).size() == 3, "ingest should keep all three records");

    // Validation errors exit with 1.
    expect(run(cli + " ingest --in " + p("raw.jsonl") + " --map nonsense --out " +
               p("x.jsonl") + " 2> /dev/null") == 1,
           "bad --map should exit 1");
    expect(run(cli + " --config " + p("missing.json") + " format --in " + p("corpus.jsonl") +
               " --out " + p("y.jsonl") + " 2> /dev/null") == 1,
           "missing config should exit 1");
    // Runtime errors exit with 2.
    expect(run(cli + " dedupe --in " + p("nope.jsonl") + " --eval " + p("corpus.jsonl") +
               " --out " + p("z.jsonl") + " 2> /dev/null") == 2,
           "unreadable input should exit 2");

    // Synthetic labeled corpora for the trainable stages.
    const auto train_pool = synth::make_corpus(synth::kEvalCombos, 6, 5, "cli-train");
    const auto gold = synth::make_corpus(synth::pretrain_combos(10), 4, 6, "cli-gold");
    write_corpus(train_pool, p("train.jsonl"));
    write_corpus(gold, p("gold.jsonl"));

    // dedupe: gold survives against a disjoint eval set.
    expect(run(cli + " dedupe --in " + p("gold.jsonl") + " --eval " + p("train.jsonl") +
               " --out " + p("gold_clean.jsonl") + " > /dev/null") == 0,
           "dedupe should succeed");

    // format: one record per example, label_denoise by default.
    expect(run(cli + " format --kind label_denoise --in " + p("gold.jsonl") + " --out " +
               p("records.jsonl") + " > /dev/null") == 0,
           "format should succeed");
    const auto records = read_records(p("records.jsonl"));
    expect(records.size() == gold.size(), "format should emit one record per example");
    expect(!records.empty() && records[0].format == RecordFormat::label_denoise,
           "records should carry the label_denoise tag");

    // split: nested files under <out>/<seed>/k<k>.jsonl.
    expect(run(cli + " split --in " + p("train.jsonl") + " --ks 1,2 --seed 7 --out-dir " +
               p("splits") + " > /dev/null") == 0,
           "split should succeed");
    expect(fs::exists(dir / "splits" / "7" / "k1.jsonl"), "split file k1 should exist");
    expect(read_corpus((dir / "splits" / "7" / "k1.jsonl").string()).size() == 5,
           "k=1 split should hold one example per class");

    // Re-running split must produce byte-identical files.
    const auto before = file_checksum((dir / "splits" / "7" / "k2.jsonl").string());
    run(cli + " split --in " + p("train.jsonl") + " --ks 1,2 --seed 7 --out-dir " + p("splits") +
        " > /dev/null");
    expect(file_checksum((dir / "splits" / "7" / "k2.jsonl").string()) == before,
           "split output should be idempotent");

    // ablate-shuffle and ablate-remap.
    expect(run(cli + " ablate-shuffle --in " + p("gold.jsonl") + " --seed 3 --out " +
               p("shuffled.jsonl") + " > /dev/null") == 0,
           "ablate-shuffle should succeed");
    expect(run(cli + " ablate-remap --train " + p("train.jsonl") + " --test " + p("train.jsonl") +
               " --seed 3 --out-train " + p("rt.jsonl") + " --out-test " + p("rte.jsonl") +
               " --out-map " + p("map.json") + " > /dev/null") == 0,
           "ablate-remap should succeed");
    {
        std::ifstream in(p("map.json"));
        json j = json::parse(in);
        expect(j.at("mapping").size() == 5, "remap manifest should cover the label set");
        for (const auto& [from, to] : j.at("mapping").items()) {
            expect(from != to.get<std::string>(), "remap manifest must be a derangement");
        }
    }

    // overlap report.
    expect(run(cli + " overlap --pretrain " + p("gold.jsonl") + " --eval " + p("train.jsonl") +
               " --out " + p("overlap.json") + " > /dev/null") == 0,
           "overlap should succeed");
    {
        std::ifstream in(p("overlap.json"));
        json j = json::parse(in);
        expect(j.contains("exact_or_substring") && j.contains("lexical") &&
                   j.contains("top_similar"),
               "overlap report should carry all three analyses");
    }

    // Two-phase audit: emit a sample, fill judgments, score them.
    expect(run(cli + " audit --in " + p("gold.jsonl") + " --sample 10 --seed 7 --emit " +
               p("sample.jsonl") + " > /dev/null") == 0,
           "audit --emit should succeed");
    {
        std::ifstream in(p("sample.jsonl"));
        std::ofstream out(p("judgments.jsonl"));
        std::string line;
        size_t n = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            expect(j.contains("id") && j.contains("utterance"),
                   "audit sample lines should carry id and utterance");
            out << json{{"id", j.at("id")}, {"intentful", n < 9}}.dump() << "\n";
            ++n;
        }
        expect(n == 10, "audit sample should hold exactly 10 utterances");
    }
    {
        std::ostringstream capture_cmd;
        capture_cmd << cli << " audit --in " << p("gold.jsonl")
                    << " --sample 10 --seed 7 --judgments " << p("judgments.jsonl") << " > "
                    << p("audit_out.txt");
        expect(run(capture_cmd.str()) == 0, "audit --judgments should succeed");
        std::ifstream in(p("audit_out.txt"));
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        expect(text.find("0.9") != std::string::npos, "audit precision should print 0.9");
    }

    // gen-train -> pseudo-label -> pretrain -> finetune -> eval, smallest viable.
    {
        std::ofstream cfg(p("config.json"));
        cfg << R"({"backend": {"d_model": 32, "n_heads": 2, "enc_layers": 1, "dec_layers": 1,
                   "max_gen_len": 5}})";
    }
    const std::string with_cfg = cli + " --config " + p("config.json") + " ";
    expect(run(with_cfg + "gen-train --in " + p("gold.jsonl") + " --out " + p("gen.bin") +
               " --epochs 8 --batch 8 --lr 3e-3 > /dev/null") == 0,
           "gen-train should succeed");
    write_corpus(synth::make_corpus(synth::kEvalCombos, 2, 9, "cli-wild"), p("wild.jsonl"));
    expect(run(with_cfg + "pseudo-label --model " + p("gen.bin") + " --in " + p("wild.jsonl") +
               " --train-corpus " + p("gold.jsonl") + " --out " + p("bronze.jsonl") +
               " > /dev/null") == 0,
           "pseudo-label should succeed");
    for (const auto& ex : read_corpus(p("bronze.jsonl"))) {
        expect(ex.quality == Quality::bronze, "pseudo-labeled output must be bronze");
    }
    expect(run(with_cfg + "pretrain --records " + p("records.jsonl") + " --out " + p("base.bin") +
               " --epochs 2 --batch 16 --lr 3e-3 > /dev/null") == 0,
           "pretrain should succeed");
    expect(fs::exists(p("base.bin") + ".manifest.json"), "pretrain should write a manifest");
    expect(run(with_cfg + "finetune --base " + p("base.bin") + " --split " +
               (dir / "splits" / "7" / "k1.jsonl").string() + " --k 1 --k-max 2 --out " +
               p("ft.bin") + " > /dev/null") == 0,
           "finetune should succeed");
    expect(run(with_cfg + "eval --model " + p("ft.bin") + " --test " + p("train.jsonl") +
               " --out " + p("eval.json") + " > /dev/null") == 0,
           "eval should succeed");
    {
        std::ifstream in(p("eval.json"));
        json j = json::parse(in);
        expect(j.contains("accuracy") && j.contains("confusion"),
               "eval report should carry accuracy and confusion");
    }

    // Full grid through the report subcommand, smallest viable settings.
    {
        std::ofstream cfg(p("grid_config.json"));
        cfg << R"({"backend": {"d_model": 32, "n_heads": 2, "enc_layers": 1, "dec_layers": 1,
                   "max_gen_len": 5},
                   "splits": {"ks": [1], "seeds": [1], "split_seed": 7},
                   "runner": {"pretrain_learning_rate": 3e-3, "pretrain_batch_size": 16,
                              "pretrain_epochs": 2}})";
    }
    expect(run(cli + " --config " + p("grid_config.json") + " report --train " + p("train.jsonl") +
               " --test " + p("train.jsonl") + " --pretrain-corpus " + p("gold.jsonl") +
               " --out-dir " + p("results") + " > /dev/null") == 0,
           "report should succeed");
    expect(fs::exists(dir / "results" / "report.json"), "report.json should exist");
    expect(fs::exists(dir / "results" / "cells" / "s1_k1.json"), "cell file should exist");

    if (failures == 0) std::cout << "cli smoke: all checks passed\n";
    return failures;
}
