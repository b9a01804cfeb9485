#include "lsap/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lsap/intent_text.hpp"
#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string records_checksum(const std::vector<PretrainRecord>& records) {
    uint64_t h = fnv1a64("records");
    for (const auto& r : records) {
        h = fnv1a64(r.input, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(r.target, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(format_name(r.format), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(r.source_id, h);
        h = fnv1a64("\x1e", h);
    }
    return hex64(h);
}

std::string RunManifest::key() const {
    uint64_t h = fnv1a64(records_checksum);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "|lr=%.9g|bs=%d|ep=%d|seed=%llu", hp.learning_rate,
                  hp.batch_size, hp.epochs, static_cast<unsigned long long>(hp.seed));
    h = fnv1a64(buf, h);
    h = fnv1a64(note, h);
    return hex64(h);
}

void RunManifest::write(const std::string& path) const {
    json j;
    j["records_checksum"] = records_checksum;
    j["hyperparams"] = {{"learning_rate", hp.learning_rate},
                        {"batch_size", hp.batch_size},
                        {"epochs", hp.epochs},
                        {"seed", hp.seed}};
    j["note"] = note;
    j["key"] = key();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("manifest: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

PretrainResult pretrain(Seq2SeqBackend& backend, const std::vector<PretrainRecord>& records,
                        const PretrainOverride& hp_override) {
    if (records.empty()) throw std::invalid_argument("pretrain: no records");
    Hyperparams hp;
    hp.learning_rate = hp_override.learning_rate.value_or(kPretrainLearningRate);
    hp.batch_size = hp_override.batch_size.value_or(kPretrainBatchSize);
    hp.epochs = hp_override.epochs.value_or(kPretrainEpochs);
    hp.seed = hp_override.seed;
    hp.validate();

    PretrainResult result;
    result.manifest.records_checksum = records_checksum(records);
    result.manifest.hp = hp;
    result.manifest.note = "pretrain";
    result.handle = backend.train(records, hp, nullptr);
    return result;
}

int epochs_for_split(int base_epochs, int k_max, int k) {
    if (base_epochs <= 0 || k_max <= 0 || k <= 0) {
        throw std::invalid_argument("epoch schedule: base_epochs, k_max, and k must be positive");
    }
    const int64_t steps = static_cast<int64_t>(base_epochs) * k_max;
    return static_cast<int>((steps + k - 1) / k);  // ceil
}

Seq2SeqHandlePtr finetune(Seq2SeqBackend& backend, const Seq2SeqHandlePtr& base,
                          const std::vector<LabeledExample>& split, RecordFormat format,
                          const FinetuneSchedule& schedule, const IntentTextConfig& cfg) {
    if (split.empty()) throw std::invalid_argument("finetune: empty split");
    std::vector<PretrainRecord> records;
    records.reserve(split.size());
    switch (format) {
        case RecordFormat::finetune:
            for (const auto& ex : split) records.push_back(make_finetune_record(ex, cfg));
            break;
        case RecordFormat::label_denoise_ft:
            for (const auto& ex : split) {
                records.push_back(make_label_denoise_ft_record(ex, backend.tokenizer(), cfg));
            }
            break;
        case RecordFormat::joint_icsl: {
            const bool any_slots =
                std::any_of(split.begin(), split.end(),
                            [](const LabeledExample& ex) { return !ex.slots.empty(); });
            if (!any_slots) {
                throw std::invalid_argument(
                    "finetune: joint_icsl requested but no example in the split carries slots");
            }
            for (const auto& ex : split) records.push_back(make_joint_icsl_record(ex, cfg));
            break;
        }
        default:
            throw std::invalid_argument("finetune: format must be finetune, label_denoise_ft, "
                                        "or joint_icsl");
    }
    Hyperparams hp;
    hp.learning_rate = schedule.learning_rate;
    hp.batch_size = schedule.batch_size;
    hp.epochs = epochs_for_split(schedule.base_epochs, schedule.k_max, schedule.k);
    hp.seed = schedule.seed;
    return backend.train(records, hp, base);
}

std::vector<std::string> predict_intents(const Seq2SeqBackend& backend,
                                         const Seq2SeqHandlePtr& handle,
                                         const std::vector<LabeledExample>& test) {
    std::vector<std::string> inputs;
    inputs.reserve(test.size());
    for (const auto& ex : test) inputs.push_back(std::string(kTaskPrefix) + ex.utterance);
    return backend.generate(handle, inputs);
}

std::pair<double, Confusion> evaluate_ic(const std::vector<std::string>& preds,
                                         const std::vector<std::string>& golds) {
    if (preds.size() != golds.size()) {
        throw std::invalid_argument("evaluate_ic: " + std::to_string(preds.size()) +
                                    " predictions for " + std::to_string(golds.size()) +
                                    " gold labels");
    }
    std::set<std::string> gold_set;
    for (const auto& g : golds) gold_set.insert(normalize_label(g));

    Confusion confusion;
    size_t correct = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const std::string p = normalize_label(preds[i]);
        const std::string g = normalize_label(golds[i]);
        if (p == g) {
            ++correct;
            ++confusion[{g, g}];
        } else if (gold_set.count(p)) {
            ++confusion[{g, p}];
        } else {
            ++confusion[{g, kEpsilonBucket}];
        }
    }
    const double acc = preds.empty() ? 0.0 : double(correct) / double(preds.size());
    return {acc, confusion};
}

std::vector<std::pair<std::string, std::string>> parse_bracketed_slots(const std::string& text) {
    struct Group {
        std::vector<std::string> text;
        std::vector<std::string> label;
        bool in_label = false;
    };
    std::vector<Group> stack;
    std::vector<std::pair<std::string, std::string>> slots;
    for (const auto& tok : split_ws(text)) {
        if (tok == "[") {
            stack.push_back({});
        } else if (tok == "|") {
            if (stack.empty()) return slots;  // stray separator: stop parsing
            stack.back().in_label = true;
        } else if (tok == "]") {
            if (stack.empty()) return slots;
            Group g = std::move(stack.back());
            stack.pop_back();
            const std::string span_text = join(g.text, " ");
            const std::string span_label = join(g.label, " ");
            if (!stack.empty()) {
                // Nested group: a slot. Its surface text flows up to the parent.
                if (!span_text.empty() && !span_label.empty()) {
                    slots.push_back({span_text, span_label});
                }
                auto& parent = stack.back();
                for (const auto& w : split_ws(span_text)) {
                    (parent.in_label ? parent.label : parent.text).push_back(w);
                }
            }
            // Outermost group closing is the intent frame; nothing to record.
        } else if (!stack.empty()) {
            auto& g = stack.back();
            (g.in_label ? g.label : g.text).push_back(tok);
        }
        // Tokens outside any bracket are ignored.
    }
    return slots;  // unclosed groups are discarded
}

double evaluate_sl(const std::vector<std::string>& pred_parses,
                   const std::vector<LabeledExample>& gold) {
    if (pred_parses.size() != gold.size()) {
        throw std::invalid_argument("evaluate_sl: prediction/gold count mismatch");
    }
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
        std::multiset<std::pair<std::string, std::string>> want;
        for (const auto& s : gold[i].slots) {
            want.insert({collapse_whitespace(gold[i].utterance.substr(
                             static_cast<size_t>(s.start), static_cast<size_t>(s.end - s.start))),
                         collapse_whitespace(s.label)});
        }
        for (const auto& [text, label] : parse_bracketed_slots(pred_parses[i])) {
            auto it = want.find({collapse_whitespace(text), collapse_whitespace(label)});
            if (it != want.end()) {
                ++tp;
                want.erase(it);
            } else {
                ++fp;
            }
        }
        fn += want.size();
    }
    if (tp == 0) return 0.0;
    const double precision = double(tp) / double(tp + fp);
    const double recall = double(tp) / double(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

std::pair<double, double> aggregate_seeds(const std::map<uint64_t, double>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("aggregate_seeds: no seeds");
    double sum = 0.0;
    for (const auto& [seed, acc] : per_seed) sum += acc;
    const double mean = sum / static_cast<double>(per_seed.size());
    double sq = 0.0;
    for (const auto& [seed, acc] : per_seed) sq += (acc - mean) * (acc - mean);
    const double stddev = std::sqrt(sq / static_cast<double>(per_seed.size()));
    return {mean, stddev};
}

namespace {

json confusion_to_json(const Confusion& confusion) {
    json arr = json::array();
    for (const auto& [key, count] : confusion) {
        arr.push_back({{"gold", key.first}, {"pred", key.second}, {"count", count}});
    }
    return arr;
}

Confusion confusion_from_json(const json& arr) {
    Confusion c;
    for (const auto& e : arr) {
        c[{e.at("gold").get<std::string>(), e.at("pred").get<std::string>()}] =
            e.at("count").get<uint64_t>();
    }
    return c;
}

std::string cell_key(const std::string& grid_key, uint64_t seed, int k) {
    return hex64(fnv1a64("cell:" + grid_key + ":" + std::to_string(seed) + ":" +
                         std::to_string(k)));
}

}  // namespace

ExperimentReport run_experiment(Seq2SeqBackend& backend, const ExperimentConfig& config) {
    if (config.out_dir.empty()) throw std::invalid_argument("run_experiment: out_dir required");
    if (config.ks.empty()) throw std::invalid_argument("run_experiment: ks must be non-empty");
    if (config.finetune_seeds.empty()) {
        throw std::invalid_argument("run_experiment: finetune_seeds must be non-empty");
    }
    fs::create_directories(fs::path(config.out_dir) / "cells");

    std::vector<LabeledExample> train = read_corpus(config.train_path);
    std::vector<LabeledExample> test = read_corpus(config.test_path);

    ExperimentReport report;
    if (config.remap_eval) {
        RemapResult remapped = remap_eval_labels(train, test, config.remap_seed);
        train = std::move(remapped.train);
        test = std::move(remapped.test);
        report.used_remap = remapped.remap;
    }

    // Optional pre-training stage, cached by manifest key.
    Seq2SeqHandlePtr base;
    if (!config.pretrain_corpus_path.empty()) {
        std::vector<LabeledExample> pre_corpus = read_corpus(config.pretrain_corpus_path);
        if (config.shuffle_pretrain) {
            pre_corpus = shuffle_pretrain_labels(pre_corpus, config.shuffle_seed);
        }
        const std::vector<PretrainRecord> records =
            format_corpus(pre_corpus, config.pretrain_format, backend.tokenizer(),
                          config.noise_rate, config.format_seed, config.intent_text);

        RunManifest manifest;
        manifest.records_checksum = records_checksum(records);
        Hyperparams hp;
        hp.learning_rate = config.pretrain_hp.learning_rate.value_or(kPretrainLearningRate);
        hp.batch_size = config.pretrain_hp.batch_size.value_or(kPretrainBatchSize);
        hp.epochs = config.pretrain_hp.epochs.value_or(kPretrainEpochs);
        hp.seed = config.pretrain_hp.seed;
        manifest.hp = hp;
        manifest.note = "pretrain";
        report.pretrain_manifest_key = manifest.key();

        const fs::path model_path =
            fs::path(config.out_dir) / ("pretrain_" + manifest.key() + ".bin");
        if (fs::exists(model_path)) {
            base = backend.load(model_path.string());
        } else {
            base = backend.train(records, hp, nullptr);
            backend.save(base, model_path.string());
            manifest.write((fs::path(config.out_dir) /
                            ("pretrain_" + manifest.key() + ".manifest.json"))
                               .string());
        }
    }

    const FewShotSplitSet splits =
        make_fewshot_splits(train, config.ks, config.split_seed, config.intent_text);

    std::vector<std::string> golds;
    golds.reserve(test.size());
    for (const auto& ex : test) golds.push_back(natural_label_for(ex, config.intent_text));

    // Grid identity: anything that changes a cell's result contributes here.
    const std::string train_checksum = file_checksum(config.train_path);
    const std::string test_checksum = file_checksum(config.test_path);
    uint64_t gh = fnv1a64("grid");
    gh = fnv1a64(train_checksum, gh);
    gh = fnv1a64(test_checksum, gh);
    gh = fnv1a64(report.pretrain_manifest_key, gh);
    gh = fnv1a64(format_name(config.finetune_format), gh);
    char hpbuf[128];
    std::snprintf(hpbuf, sizeof(hpbuf), "ft|lr=%.9g|bs=%d|be=%d|split=%llu|remap=%d:%llu",
                  config.finetune_lr, config.finetune_batch, config.finetune_base_epochs,
                  static_cast<unsigned long long>(config.split_seed), config.remap_eval ? 1 : 0,
                  static_cast<unsigned long long>(config.remap_seed));
    gh = fnv1a64(hpbuf, gh);
    const std::string grid_key = hex64(gh);

    const int k_max = config.ks.back();
    for (uint64_t seed : config.finetune_seeds) {
        for (int k : config.ks) {
            const std::string key = cell_key(grid_key, seed, k);
            const fs::path cell_path =
                fs::path(config.out_dir) / "cells" /
                ("s" + std::to_string(seed) + "_k" + std::to_string(k) + ".json");
            double accuracy = 0.0;
            Confusion confusion;
            bool have_result = false;

            if (fs::exists(cell_path)) {
                std::ifstream in(cell_path);
                json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
                if (!j.is_discarded() && j.value("key", "") == key) {
                    accuracy = j.at("accuracy").get<double>();
                    confusion = confusion_from_json(j.at("confusion"));
                    have_result = true;
                }
            }

            if (!have_result) {
                try {
                    FinetuneSchedule schedule;
                    schedule.learning_rate = config.finetune_lr;
                    schedule.batch_size = config.finetune_batch;
                    schedule.base_epochs = config.finetune_base_epochs;
                    schedule.k_max = k_max;
                    schedule.k = k;
                    schedule.seed = seed;
                    Seq2SeqHandlePtr tuned =
                        finetune(backend, base, splits.splits.at(k), config.finetune_format,
                                 schedule, config.intent_text);
                    const std::vector<std::string> preds = predict_intents(backend, tuned, test);
                    std::tie(accuracy, confusion) = evaluate_ic(preds, golds);

                    json j;
                    j["key"] = key;
                    j["seed"] = seed;
                    j["k"] = k;
                    j["accuracy"] = accuracy;
                    j["confusion"] = confusion_to_json(confusion);
                    j["manifest"] = {
                        {"train_checksum", train_checksum},
                        {"test_checksum", test_checksum},
                        {"pretrain_key", report.pretrain_manifest_key},
                        {"format", format_name(config.finetune_format)},
                        {"learning_rate", schedule.learning_rate},
                        {"batch_size", schedule.batch_size},
                        {"epochs", epochs_for_split(schedule.base_epochs, k_max, k)},
                        {"seed", seed}};
                    std::ofstream out(cell_path);
                    out << j.dump(2) << "\n";
                    have_result = true;
                } catch (const std::exception& e) {
                    report.failed_cells.push_back("seed=" + std::to_string(seed) +
                                                  " k=" + std::to_string(k) + ": " + e.what());
                }
            }

            if (have_result) {
                auto& agg = report.by_k[k];
                agg.per_seed_accuracy[seed] = accuracy;
                for (const auto& [ckey, count] : confusion) agg.confusion[ckey] += count;
            }
        }
    }

    for (auto& [k, agg] : report.by_k) {
        std::tie(agg.mean, agg.stddev) = aggregate_seeds(agg.per_seed_accuracy);
    }
    write_report(report, config.out_dir);
    return report;
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    json j;
    j["std_kind"] = "population";
    j["pretrain_manifest_key"] = report.pretrain_manifest_key;
    json by_k = json::object();
    for (const auto& [k, agg] : report.by_k) {
        json entry;
        json per_seed = json::object();
        for (const auto& [seed, acc] : agg.per_seed_accuracy) {
            per_seed[std::to_string(seed)] = acc;
        }
        entry["per_seed_accuracy"] = per_seed;
        entry["mean"] = agg.mean;
        entry["std"] = agg.stddev;
        entry["confusion"] = confusion_to_json(agg.confusion);
        by_k[std::to_string(k)] = entry;
    }
    j["by_k"] = by_k;
    j["failed_cells"] = report.failed_cells;
    if (report.used_remap) {
        json m = json::object();
        for (const auto& [from, to] : report.used_remap->mapping) m[from] = to;
        j["label_remap"] = m;
    }
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw std::runtime_error("write_report: cannot write report.json");
    out << j.dump(2) << "\n";

    // One confusion CSV per split size.
    for (const auto& [k, agg] : report.by_k) {
        std::ofstream csv(fs::path(out_dir) / ("confusion_k" + std::to_string(k) + ".csv"));
        csv << "gold,pred,count\n";
        for (const auto& [key, count] : agg.confusion) {
            csv << "\"" << key.first << "\",\"" << key.second << "\"," << count << "\n";
        }
    }
}

}  // namespace lsap
