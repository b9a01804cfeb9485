#include "lsap/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lsap/text_util.hpp"

namespace lsap {

using json = nlohmann::json;

ThresholdPolicy threshold_policy_from_string(const std::string& spec) {
    if (spec == "accept_all_positive") return ThresholdPolicy::accept_all_positive();
    if (spec == "median_of_positives") return ThresholdPolicy::median_of_positives();
    if (starts_with(spec, "fixed:")) {
        try {
            return ThresholdPolicy::fixed(std::stod(spec.substr(6)));
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("filter.policy: cannot parse '" + spec + "'");
        }
    }
    throw std::invalid_argument(
        "filter.policy: expected accept_all_positive, median_of_positives, or fixed:<tau>, got '" +
        spec + "'");
}

namespace {

void check_known_keys(const json& obj, const std::string& section,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("config: unknown key '" +
                                        (section.empty() ? key : section + "." + key) + "'");
        }
    }
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("config: '" + path + "' is not a JSON object");
    }
    check_known_keys(j, "", {"intent_text", "filter", "format", "splits", "runner", "backend"});

    PipelineConfig cfg;
    if (j.contains("intent_text")) {
        const auto& section = j["intent_text"];
        check_known_keys(section, "intent_text", {"strip_prefixes"});
        if (section.contains("strip_prefixes")) {
            cfg.intent_text.strip_prefixes =
                section["strip_prefixes"].get<std::vector<std::string>>();
        }
    }
    if (j.contains("filter")) {
        const auto& section = j["filter"];
        check_known_keys(section, "filter", {"generic_intents", "ood_intents", "policy"});
        if (section.contains("generic_intents")) {
            for (const auto& v : section["generic_intents"]) {
                cfg.filter_generic_intents.insert(v.get<std::string>());
            }
        }
        if (section.contains("ood_intents")) {
            for (const auto& v : section["ood_intents"]) {
                cfg.filter_ood_intents.insert(v.get<std::string>());
            }
        }
        if (section.contains("policy")) {
            cfg.filter_policy = threshold_policy_from_string(section["policy"].get<std::string>());
        }
    }
    if (j.contains("format")) {
        const auto& section = j["format"];
        check_known_keys(section, "format", {"noise_rate", "seed"});
        if (section.contains("noise_rate")) cfg.format_noise_rate = section["noise_rate"].get<double>();
        if (section.contains("seed")) cfg.format_seed = section["seed"].get<uint64_t>();
    }
    if (j.contains("splits")) {
        const auto& section = j["splits"];
        check_known_keys(section, "splits", {"ks", "seeds", "split_seed"});
        if (section.contains("ks")) cfg.split_ks = section["ks"].get<std::vector<int>>();
        if (section.contains("seeds")) {
            cfg.finetune_seeds = section["seeds"].get<std::vector<uint64_t>>();
        }
        if (section.contains("split_seed")) cfg.split_seed = section["split_seed"].get<uint64_t>();
    }
    if (j.contains("runner")) {
        const auto& section = j["runner"];
        check_known_keys(section, "runner",
                         {"pretrain_learning_rate", "pretrain_batch_size", "pretrain_epochs",
                          "pretrain_seed", "finetune_learning_rate", "finetune_batch_size",
                          "finetune_base_epochs"});
        if (section.contains("pretrain_learning_rate")) {
            cfg.pretrain_hp.learning_rate = section["pretrain_learning_rate"].get<double>();
        }
        if (section.contains("pretrain_batch_size")) {
            cfg.pretrain_hp.batch_size = section["pretrain_batch_size"].get<int>();
        }
        if (section.contains("pretrain_epochs")) {
            cfg.pretrain_hp.epochs = section["pretrain_epochs"].get<int>();
        }
        if (section.contains("pretrain_seed")) {
            cfg.pretrain_hp.seed = section["pretrain_seed"].get<uint64_t>();
        }
        if (section.contains("finetune_learning_rate")) {
            cfg.finetune_lr = section["finetune_learning_rate"].get<double>();
        }
        if (section.contains("finetune_batch_size")) {
            cfg.finetune_batch = section["finetune_batch_size"].get<int>();
        }
        if (section.contains("finetune_base_epochs")) {
            cfg.finetune_base_epochs = section["finetune_base_epochs"].get<int>();
        }
    }
    if (j.contains("backend")) {
        const auto& section = j["backend"];
        check_known_keys(section, "backend",
                         {"d_model", "n_heads", "enc_layers", "dec_layers", "ff_mult",
                          "max_src_len", "max_tgt_len", "max_gen_len", "threads"});
        auto get_int = [&section](const char* key, int& out) {
            if (section.contains(key)) out = section[key].get<int>();
        };
        get_int("d_model", cfg.backend.d_model);
        get_int("n_heads", cfg.backend.n_heads);
        get_int("enc_layers", cfg.backend.enc_layers);
        get_int("dec_layers", cfg.backend.dec_layers);
        get_int("ff_mult", cfg.backend.ff_mult);
        get_int("max_src_len", cfg.backend.max_src_len);
        get_int("max_tgt_len", cfg.backend.max_tgt_len);
        get_int("max_gen_len", cfg.backend.max_gen_len);
        get_int("threads", cfg.backend.threads);
    }
    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    if (format_noise_rate < 0.0 || format_noise_rate >= 1.0) {
        throw std::invalid_argument("format.noise_rate: must lie in [0,1)");
    }
    if (split_ks.empty()) throw std::invalid_argument("splits.ks: must be non-empty");
    for (size_t i = 0; i < split_ks.size(); ++i) {
        if (split_ks[i] <= 0 || (i > 0 && split_ks[i] <= split_ks[i - 1])) {
            throw std::invalid_argument("splits.ks: must be strictly increasing and positive");
        }
    }
    if (finetune_seeds.empty()) throw std::invalid_argument("splits.seeds: must be non-empty");
    if (finetune_lr <= 0.0) throw std::invalid_argument("runner.finetune_learning_rate: must be positive");
    if (finetune_batch <= 0) throw std::invalid_argument("runner.finetune_batch_size: must be positive");
    if (finetune_base_epochs <= 0) {
        throw std::invalid_argument("runner.finetune_base_epochs: must be positive");
    }
    if (pretrain_hp.learning_rate && *pretrain_hp.learning_rate <= 0.0) {
        throw std::invalid_argument("runner.pretrain_learning_rate: must be positive");
    }
    if (pretrain_hp.batch_size && *pretrain_hp.batch_size <= 0) {
        throw std::invalid_argument("runner.pretrain_batch_size: must be positive");
    }
    if (pretrain_hp.epochs && *pretrain_hp.epochs <= 0) {
        throw std::invalid_argument("runner.pretrain_epochs: must be positive");
    }
    if (backend.d_model <= 0 || backend.n_heads <= 0 || backend.d_model % backend.n_heads != 0) {
        throw std::invalid_argument("backend.d_model: must be positive and divisible by n_heads");
    }
}

}  // namespace lsap
