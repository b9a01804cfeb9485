// Command-line interface over the LSAP corpus pipeline. Each subcommand is a
// thin binding to one library operation; data interchange goes through the
// corpus and record JSONL schemas.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "lsap/ablations.hpp"
#include "lsap/classifier.hpp"
#include "lsap/config.hpp"
#include "lsap/corpus.hpp"
#include "lsap/dialogue_filter.hpp"
#include "lsap/formats.hpp"
#include "lsap/intent_generator.hpp"
#include "lsap/runner.hpp"
#include "lsap/seq2seq_tiny.hpp"
#include "lsap/splits.hpp"
#include "lsap/text_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lsap;

namespace {

PipelineConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return PipelineConfig{};
    return PipelineConfig::load(config_path);
}

std::map<std::string, std::string> parse_field_map(const std::string& spec) {
    std::map<std::string, std::string> out;
    for (const auto& part : split_on(spec, ",")) {
        const auto kv = split_on(part, "=");
        if (kv.size() != 2 || kv[0].empty() || kv[1].empty()) {
            throw std::invalid_argument("--map: expected field=key pairs, got '" + part + "'");
        }
        out[trim(kv[0])] = trim(kv[1]);
    }
    return out;
}

struct CliError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-semantic-aware pre-training corpus pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Pipeline config JSON");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Convert a raw JSONL dump into corpus format");
    std::string ingest_in, ingest_map, ingest_source = "ingest", ingest_out,
                              ingest_quality = "gold";
    ingest->add_option("--in", ingest_in, "Raw JSONL file")->required();
    ingest->add_option("--map", ingest_map, "field=key pairs, e.g. utterance=text,intent=label")
        ->required();
    ingest->add_option("--source", ingest_source, "Source name for ids/provenance");
    ingest->add_option("--quality", ingest_quality, "Quality tier for labeled records");
    ingest->add_option("--out", ingest_out, "Output corpus JSONL")->required();

    // ---- dedupe ----
    auto* dedupe = app.add_subcommand("dedupe", "Drop corpus utterances present in eval sets");
    std::string dedupe_in, dedupe_out;
    std::vector<std::string> dedupe_evals;
    dedupe->add_option("--in", dedupe_in)->required();
    dedupe->add_option("--eval", dedupe_evals, "Eval corpus files")->required();
    dedupe->add_option("--out", dedupe_out)->required();

    // ---- filter-train ----
    auto* ftrain = app.add_subcommand("filter-train", "Train the intentfulness classifier");
    std::string ftrain_multidogo, ftrain_sgd, ftrain_model;
    uint64_t ftrain_seed = 0;
    ftrain->add_option("--multidogo", ftrain_multidogo, "MultiDoGO-style corpus")->required();
    ftrain->add_option("--sgd", ftrain_sgd, "SGD-style corpus (INFORM/REQUEST tags)")->required();
    ftrain->add_option("--out", ftrain_model, "Classifier model file")->required();
    ftrain->add_option("--seed", ftrain_seed);

    // ---- filter-apply ----
    auto* fapply = app.add_subcommand("filter-apply", "Score and threshold unlabeled utterances");
    std::string fapply_model, fapply_in, fapply_out, fapply_policy;
    fapply->add_option("--model", fapply_model)->required();
    fapply->add_option("--in", fapply_in)->required();
    fapply->add_option("--out", fapply_out)->required();
    fapply->add_option("--policy", fapply_policy,
                       "accept_all_positive | median_of_positives | fixed:<tau>");

    // ---- audit ----
    auto* audit = app.add_subcommand("audit", "Draw an audit sample / score judgments");
    std::string audit_in, audit_sample_out, audit_judgments;
    size_t audit_n = 150;
    uint64_t audit_seed = 0;
    audit->add_option("--in", audit_in, "Filtered corpus")->required();
    audit->add_option("--sample", audit_n, "Sample size");
    audit->add_option("--seed", audit_seed);
    audit->add_option("--emit", audit_sample_out, "Write the sample JSONL here");
    audit->add_option("--judgments", audit_judgments, "Judgment JSONL to score");

    // ---- gen-train ----
    auto* gtrain = app.add_subcommand("gen-train", "Train the seq2seq intent generator");
    std::string gtrain_in, gtrain_out;
    double gtrain_lr = 1e-3;
    int gtrain_batch = 16, gtrain_epochs = 30;
    uint64_t gtrain_seed = 0;
    gtrain->add_option("--in", gtrain_in, "Gold+silver corpus")->required();
    gtrain->add_option("--out", gtrain_out, "Model file")->required();
    gtrain->add_option("--lr", gtrain_lr);
    gtrain->add_option("--batch", gtrain_batch);
    gtrain->add_option("--epochs", gtrain_epochs);
    gtrain->add_option("--seed", gtrain_seed);

    // ---- pseudo-label ----
    auto* plabel = app.add_subcommand("pseudo-label", "Label filtered utterances as bronze data");
    std::string plabel_model, plabel_in, plabel_out, plabel_train_intents;
    plabel->add_option("--model", plabel_model)->required();
    plabel->add_option("--in", plabel_in)->required();
    plabel->add_option("--out", plabel_out)->required();
    plabel->add_option("--train-corpus", plabel_train_intents,
                       "Corpus whose intents define the novelty baseline");

    // ---- format ----
    auto* format = app.add_subcommand("format", "Build pre-training / fine-tuning records");
    std::string format_kind = "label_denoise", format_in, format_out;
    std::optional<double> format_rate;
    std::optional<uint64_t> format_seed_flag;
    format->add_option("--kind", format_kind,
                       "span_denoise | ic | label_denoise | finetune | label_denoise_ft | joint_icsl");
    format->add_option("--in", format_in)->required();
    format->add_option("--out", format_out)->required();
    format->add_option("--noise-rate", format_rate);
    format->add_option("--seed", format_seed_flag);

    // ---- split ----
    auto* split = app.add_subcommand("split", "Generate nested few-shot splits");
    std::string split_in, split_out_dir;
    std::string split_ks_flag;
    std::optional<uint64_t> split_seed_flag;
    split->add_option("--in", split_in)->required();
    split->add_option("--out-dir", split_out_dir)->required();
    split->add_option("--ks", split_ks_flag, "Comma-separated sizes, default 1,2,4,8,16,32");
    split->add_option("--seed", split_seed_flag);

    // ---- pretrain ----
    auto* pretrain_cmd = app.add_subcommand("pretrain", "Secondary pre-training on records");
    std::string pretrain_records, pretrain_out;
    std::optional<double> pretrain_lr;
    std::optional<int> pretrain_batch, pretrain_epochs;
    uint64_t pretrain_seed = 0;
    pretrain_cmd->add_option("--records", pretrain_records)->required();
    pretrain_cmd->add_option("--out", pretrain_out, "Model file")->required();
    pretrain_cmd->add_option("--lr", pretrain_lr);
    pretrain_cmd->add_option("--batch", pretrain_batch);
    pretrain_cmd->add_option("--epochs", pretrain_epochs);
    pretrain_cmd->add_option("--seed", pretrain_seed);

    // ---- finetune ----
    auto* finetune_cmd = app.add_subcommand("finetune", "Fine-tune on a few-shot split");
    std::string ft_base, ft_split, ft_out, ft_format = "finetune";
    int ft_k = 32, ft_kmax = 32;
    uint64_t ft_seed = 0;
    finetune_cmd->add_option("--base", ft_base, "Base model (omit to tune from scratch)");
    finetune_cmd->add_option("--split", ft_split, "Split corpus JSONL")->required();
    finetune_cmd->add_option("--out", ft_out)->required();
    finetune_cmd->add_option("--format", ft_format, "finetune | label_denoise_ft | joint_icsl");
    finetune_cmd->add_option("--k", ft_k, "This split's examples-per-label")->required();
    finetune_cmd->add_option("--k-max", ft_kmax, "Largest split size in the schedule");
    finetune_cmd->add_option("--seed", ft_seed);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Predict on a test corpus and score");
    std::string eval_model, eval_test, eval_out;
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--test", eval_test)->required();
    eval_cmd->add_option("--out", eval_out, "Report JSON")->required();

    // ---- ablate-shuffle ----
    auto* shuffle_cmd = app.add_subcommand("ablate-shuffle", "Shuffle pre-train labels");
    std::string shuffle_in, shuffle_out;
    uint64_t shuffle_seed = 0;
    shuffle_cmd->add_option("--in", shuffle_in)->required();
    shuffle_cmd->add_option("--out", shuffle_out)->required();
    shuffle_cmd->add_option("--seed", shuffle_seed);

    // ---- ablate-remap ----
    auto* remap_cmd = app.add_subcommand("ablate-remap", "Derange eval labels in train+test");
    std::string remap_train, remap_test, remap_out_train, remap_out_test, remap_out_map;
    uint64_t remap_seed = 0;
    remap_cmd->add_option("--train", remap_train)->required();
    remap_cmd->add_option("--test", remap_test)->required();
    remap_cmd->add_option("--out-train", remap_out_train)->required();
    remap_cmd->add_option("--out-test", remap_out_test)->required();
    remap_cmd->add_option("--out-map", remap_out_map)->required();
    remap_cmd->add_option("--seed", remap_seed);

    // ---- overlap ----
    auto* overlap_cmd = app.add_subcommand("overlap", "Eval-label overlap analysis");
    std::string overlap_pretrain, overlap_eval, overlap_out;
    size_t overlap_per_intent = 5, overlap_top = 20;
    uint64_t overlap_seed = 0;
    overlap_cmd->add_option("--pretrain", overlap_pretrain)->required();
    overlap_cmd->add_option("--eval", overlap_eval)->required();
    overlap_cmd->add_option("--out", overlap_out)->required();
    overlap_cmd->add_option("--per-intent", overlap_per_intent);
    overlap_cmd->add_option("--top", overlap_top);
    overlap_cmd->add_option("--seed", overlap_seed);

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "Run the full experiment grid");
    std::string rep_train, rep_test, rep_pretrain_corpus, rep_out_dir;
    std::string rep_pretrain_format = "label_denoise", rep_ft_format = "finetune";
    bool rep_shuffle = false, rep_remap = false, rep_no_pretrain = false;
    uint64_t rep_shuffle_seed = 0, rep_remap_seed = 0;
    report_cmd->add_option("--train", rep_train)->required();
    report_cmd->add_option("--test", rep_test)->required();
    report_cmd->add_option("--pretrain-corpus", rep_pretrain_corpus);
    report_cmd->add_flag("--no-pretrain", rep_no_pretrain, "Skip the pre-training stage");
    report_cmd->add_option("--pretrain-format", rep_pretrain_format);
    report_cmd->add_option("--finetune-format", rep_ft_format);
    report_cmd->add_option("--out-dir", rep_out_dir)->required();
    report_cmd->add_flag("--shuffle-pretrain", rep_shuffle);
    report_cmd->add_option("--shuffle-seed", rep_shuffle_seed);
    report_cmd->add_flag("--remap-eval", rep_remap);
    report_cmd->add_option("--remap-seed", rep_remap_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const PipelineConfig cfg = load_or_default(config_path);

        if (*ingest) {
            auto quality = quality_from_name(ingest_quality);
            if (!quality) throw CliError("--quality: unknown tier '" + ingest_quality + "'");
            auto result = ingest_generic_jsonl(ingest_in, parse_field_map(ingest_map),
                                               ingest_source, *quality);
            auto manifest = write_corpus(result.examples, ingest_out);
            std::cout << "ingested " << manifest.count << " examples (skipped "
                      << result.skipped_missing_utterance << " without utterance, "
                      << result.skipped_malformed << " malformed)\n";
        } else if (*dedupe) {
            std::vector<std::vector<LabeledExample>> evals;
            for (const auto& p : dedupe_evals) evals.push_back(read_corpus(p));
            auto result = dedupe_against_eval(read_corpus(dedupe_in), evals);
            write_corpus(result.kept, dedupe_out);
            std::cout << "removed " << result.removed << ", kept " << result.kept.size() << "\n";
        } else if (*ftrain) {
            auto training = build_filter_training_set(
                read_corpus(ftrain_multidogo), read_corpus(ftrain_sgd),
                cfg.filter_generic_intents, cfg.filter_ood_intents, ftrain_seed);
            HashedLinearClassifier backend;
            ClassifierHyperparams hp;
            hp.seed = ftrain_seed;
            ClassifierReport report;
            auto handle = train_intentfulness(backend, training.examples, hp, &report);
            backend.save(handle, ftrain_model);
            std::cout << "trained on " << report.train_count << " examples; held-out accuracy "
                      << report.held_out_accuracy << ", precision " << report.held_out_precision
                      << " (dropped: " << training.dropped_no_intent << " unlabeled, "
                      << training.dropped_out_of_domain << " out-of-domain, "
                      << training.dropped_untagged << " untagged)\n";
        } else if (*fapply) {
            HashedLinearClassifier backend;
            auto handle = backend.load(fapply_model);
            auto scored = score_utterances(backend, handle, read_corpus(fapply_in));
            const ThresholdPolicy policy = fapply_policy.empty()
                                               ? cfg.filter_policy
                                               : threshold_policy_from_string(fapply_policy);
            auto kept = apply_threshold(scored, policy);
            write_corpus(kept, fapply_out);
            std::cout << "kept " << kept.size() << " of " << scored.size() << "\n";
        } else if (*audit) {
            auto filtered = read_corpus(audit_in);
            if (!audit_sample_out.empty()) {
                auto sample = draw_audit_sample(filtered, audit_n, audit_seed);
                std::ofstream out(audit_sample_out);
                for (const auto& ex : sample) {
                    out << json{{"id", ex.id}, {"utterance", ex.utterance}}.dump() << "\n";
                }
                std::cout << "wrote " << sample.size() << " utterances for judgment\n";
            }
            if (!audit_judgments.empty()) {
                std::ifstream in(audit_judgments);
                if (!in) throw std::runtime_error("cannot open '" + audit_judgments + "'");
                std::map<std::string, bool> judgments;
                std::string line;
                while (std::getline(in, line)) {
                    if (trim(line).empty()) continue;
                    json j = json::parse(line);
                    judgments[j.at("id").get<std::string>()] = j.at("intentful").get<bool>();
                }
                std::cout << "audit precision: "
                          << audit_precision(filtered, audit_n, audit_seed, judgments) << "\n";
            }
            if (audit_sample_out.empty() && audit_judgments.empty()) {
                throw CliError("audit: pass --emit and/or --judgments");
            }
        } else if (*gtrain) {
            auto pairs = build_generator_training(read_corpus(gtrain_in), cfg.intent_text);
            TinyTransformerBackend backend(cfg.backend);
            Hyperparams hp;
            hp.learning_rate = gtrain_lr;
            hp.batch_size = gtrain_batch;
            hp.epochs = gtrain_epochs;
            hp.seed = gtrain_seed;
            auto handle = backend.train(pairs, hp);
            backend.save(handle, gtrain_out);
            std::cout << "trained intent generator on " << pairs.size() << " pairs; final loss "
                      << backend.stats(handle).final_loss << "\n";
        } else if (*plabel) {
            TinyTransformerBackend backend(cfg.backend);
            auto handle = backend.load(plabel_model);
            auto result = pseudo_label(backend, handle, read_corpus(plabel_in));
            write_corpus(result.bronze, plabel_out);
            std::cout << "labeled " << result.bronze.size() << " (dropped "
                      << result.dropped_empty_generation << " empty generations)\n";
            if (!plabel_train_intents.empty()) {
                std::set<std::string> known;
                for (const auto& ex : read_corpus(plabel_train_intents)) {
                    known.insert(natural_label_for(ex, cfg.intent_text));
                }
                std::cout << "novel intent rate: " << novel_intent_rate(result.bronze, known)
                          << "\n";
            }
        } else if (*format) {
            auto kind = format_from_name(format_kind);
            if (!kind) throw CliError("--kind: unknown format '" + format_kind + "'");
            WordTokenizer tok;
            auto records = format_corpus(read_corpus(format_in), *kind, tok,
                                         format_rate.value_or(cfg.format_noise_rate),
                                         format_seed_flag.value_or(cfg.format_seed),
                                         cfg.intent_text);
            write_records(records, format_out);
            std::cout << "wrote " << records.size() << " records\n";
        } else if (*split) {
            std::vector<int> ks = cfg.split_ks;
            if (!split_ks_flag.empty()) {
                ks.clear();
                for (const auto& part : split_on(split_ks_flag, ",")) ks.push_back(std::stoi(part));
            }
            auto set = make_fewshot_splits(read_corpus(split_in), ks,
                                           split_seed_flag.value_or(cfg.split_seed),
                                           cfg.intent_text);
            auto paths = write_split_files(set, split_out_dir);
            for (const auto& p : paths) std::cout << p << "\n";
        } else if (*pretrain_cmd) {
            TinyTransformerBackend backend(cfg.backend);
            PretrainOverride hp = cfg.pretrain_hp;
            if (pretrain_lr) hp.learning_rate = pretrain_lr;
            if (pretrain_batch) hp.batch_size = pretrain_batch;
            if (pretrain_epochs) hp.epochs = pretrain_epochs;
            hp.seed = pretrain_seed;
            auto result = pretrain(backend, read_records(pretrain_records), hp);
            backend.save(result.handle, pretrain_out);
            result.manifest.write(pretrain_out + ".manifest.json");
            std::cout << "pretrained; final loss " << backend.stats(result.handle).final_loss
                      << ", manifest key " << result.manifest.key() << "\n";
        } else if (*finetune_cmd) {
            auto fmt = format_from_name(ft_format);
            if (!fmt) throw CliError("--format: unknown format '" + ft_format + "'");
            TinyTransformerBackend backend(cfg.backend);
            Seq2SeqHandlePtr base;
            if (!ft_base.empty()) base = backend.load(ft_base);
            FinetuneSchedule schedule;
            schedule.learning_rate = cfg.finetune_lr;
            schedule.batch_size = cfg.finetune_batch;
            schedule.base_epochs = cfg.finetune_base_epochs;
            schedule.k_max = ft_kmax;
            schedule.k = ft_k;
            schedule.seed = ft_seed;
            auto tuned = finetune(backend, base, read_corpus(ft_split), *fmt, schedule,
                                  cfg.intent_text);
            backend.save(tuned, ft_out);
            std::cout << "fine-tuned for " << epochs_for_split(schedule.base_epochs, ft_kmax, ft_k)
                      << " epochs; final loss " << backend.stats(tuned).final_loss << "\n";
        } else if (*eval_cmd) {
            TinyTransformerBackend backend(cfg.backend);
            auto handle = backend.load(eval_model);
            auto test = read_corpus(eval_test);
            auto preds = predict_intents(backend, handle, test);
            std::vector<std::string> golds;
            for (const auto& ex : test) golds.push_back(natural_label_for(ex, cfg.intent_text));
            auto [accuracy, confusion] = evaluate_ic(preds, golds);
            json j;
            j["accuracy"] = accuracy;
            json arr = json::array();
            for (const auto& [key, count] : confusion) {
                arr.push_back({{"gold", key.first}, {"pred", key.second}, {"count", count}});
            }
            j["confusion"] = arr;
            std::ofstream out(eval_out);
            out << j.dump(2) << "\n";
            std::cout << "accuracy " << accuracy << " over " << test.size() << " examples\n";
        } else if (*shuffle_cmd) {
            auto shuffled = shuffle_pretrain_labels(read_corpus(shuffle_in), shuffle_seed);
            write_corpus(shuffled, shuffle_out);
            std::cout << "shuffled " << shuffled.size() << " examples\n";
        } else if (*remap_cmd) {
            auto result = remap_eval_labels(read_corpus(remap_train), read_corpus(remap_test),
                                            remap_seed);
            write_corpus(result.train, remap_out_train);
            write_corpus(result.test, remap_out_test);
            json m = json::object();
            for (const auto& [from, to] : result.remap.mapping) m[from] = to;
            std::ofstream out(remap_out_map);
            out << json{{"seed", remap_seed}, {"mapping", m}}.dump(2) << "\n";
            std::cout << "remapped " << result.remap.mapping.size() << " labels\n";
        } else if (*overlap_cmd) {
            auto pre = read_corpus(overlap_pretrain);
            auto eval_set = read_corpus(overlap_eval);
            std::set<std::string> eval_intents;
            for (const auto& ex : eval_set) {
                eval_intents.insert(natural_label_for(ex, cfg.intent_text));
            }
            auto exact = intent_overlap_report(pre, eval_intents, cfg.intent_text);
            auto lexical = lexical_overlap_report(pre, eval_intents, {}, cfg.intent_text);
            std::vector<std::string> pre_utts;
            for (const auto& ex : pre) pre_utts.push_back(ex.utterance);
            std::vector<std::string> all_texts = pre_utts;
            for (const auto& ex : eval_set) all_texts.push_back(ex.utterance);
            auto encoder = BagOfWordsEncoder::from_texts(all_texts);
            auto top = semantic_similarity_report(encoder, pre_utts, eval_set, overlap_per_intent,
                                                  overlap_top, overlap_seed, cfg.intent_text);
            json j;
            j["exact_or_substring"] = {{"count", exact.count}, {"fraction", exact.fraction}};
            j["lexical"] = {{"count", lexical.count}, {"fraction", lexical.fraction}};
            json pairs = json::array();
            for (const auto& p : top) {
                pairs.push_back({{"pretrain", p.pretrain_utterance},
                                 {"eval", p.eval_utterance},
                                 {"cosine", p.cosine}});
            }
            j["top_similar"] = pairs;
            std::ofstream out(overlap_out);
            out << j.dump(2) << "\n";
            std::cout << "exact/substring " << exact.count << " (" << exact.fraction
                      << "), lexical " << lexical.count << " (" << lexical.fraction << ")\n";
        } else if (*report_cmd) {
            auto pf = format_from_name(rep_pretrain_format);
            auto ff = format_from_name(rep_ft_format);
            if (!pf) throw CliError("--pretrain-format: unknown '" + rep_pretrain_format + "'");
            if (!ff) throw CliError("--finetune-format: unknown '" + rep_ft_format + "'");
            ExperimentConfig ec;
            ec.train_path = rep_train;
            ec.test_path = rep_test;
            ec.pretrain_corpus_path = rep_no_pretrain ? "" : rep_pretrain_corpus;
            ec.pretrain_format = *pf;
            ec.noise_rate = cfg.format_noise_rate;
            ec.format_seed = cfg.format_seed;
            ec.out_dir = rep_out_dir;
            ec.ks = cfg.split_ks;
            ec.finetune_seeds = cfg.finetune_seeds;
            ec.split_seed = cfg.split_seed;
            ec.finetune_format = *ff;
            ec.pretrain_hp = cfg.pretrain_hp;
            ec.finetune_lr = cfg.finetune_lr;
            ec.finetune_batch = cfg.finetune_batch;
            ec.finetune_base_epochs = cfg.finetune_base_epochs;
            ec.shuffle_pretrain = rep_shuffle;
            ec.shuffle_seed = rep_shuffle_seed;
            ec.remap_eval = rep_remap;
            ec.remap_seed = rep_remap_seed;
            ec.intent_text = cfg.intent_text;
            TinyTransformerBackend backend(cfg.backend);
            auto report = run_experiment(backend, ec);
            for (const auto& [k, agg] : report.by_k) {
                std::cout << "k=" << k << " mean=" << agg.mean << " std=" << agg.stddev << "\n";
            }
            for (const auto& cell : report.failed_cells) std::cout << "FAILED " << cell << "\n";
            std::cout << "report written to " << rep_out_dir << "/report.json\n";
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
