#include "lsap/formats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

using json = nlohmann::json;

std::string format_name(RecordFormat f) {
    switch (f) {
        case RecordFormat::span_denoise: return "span_denoise";
        case RecordFormat::ic: return "ic";
        case RecordFormat::label_denoise: return "label_denoise";
        case RecordFormat::finetune: return "finetune";
        case RecordFormat::label_denoise_ft: return "label_denoise_ft";
        case RecordFormat::joint_icsl: return "joint_icsl";
    }
    return "ic";
}

std::optional<RecordFormat> format_from_name(const std::string& name) {
    if (name == "span_denoise") return RecordFormat::span_denoise;
    if (name == "ic") return RecordFormat::ic;
    if (name == "label_denoise") return RecordFormat::label_denoise;
    if (name == "finetune") return RecordFormat::finetune;
    if (name == "label_denoise_ft") return RecordFormat::label_denoise_ft;
    if (name == "joint_icsl") return RecordFormat::joint_icsl;
    return std::nullopt;
}

namespace {

void require_labeled(const LabeledExample& ex) {
    if (ex.intents.empty()) {
        throw std::invalid_argument("example '" + ex.id +
                                    "' is unlabeled; filter corpora before formatting");
    }
    if (trim(ex.utterance).empty()) {
        throw std::invalid_argument("example '" + ex.id + "' has an empty utterance");
    }
}

}  // namespace

PretrainRecord span_denoise_at_positions(const LabeledExample& example,
                                         const TokenizerContract& tok,
                                         std::vector<size_t> positions,
                                         const IntentTextConfig& cfg) {
    require_labeled(example);
    const std::string sequence = example.utterance + kLabelSeparator + natural_label_for(example, cfg);
    const std::vector<std::string> tokens = tok.tokenize(sequence);

    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    if (!positions.empty() && positions.back() >= tokens.size()) {
        throw std::invalid_argument("span_denoise: noise position beyond sequence length");
    }

    PretrainRecord rec;
    rec.format = RecordFormat::span_denoise;
    rec.source_id = example.id;
    if (positions.empty()) {
        rec.input = tok.detokenize(tokens);
        rec.target = "";
        return rec;
    }

    std::vector<std::string> input_tokens, target_tokens;
    int sentinel_index = 0;
    size_t p = 0;  // cursor into positions
    for (size_t i = 0; i < tokens.size();) {
        if (p < positions.size() && positions[p] == i) {
            // Contiguous run of noised positions becomes one span.
            const std::string mark = tok.sentinel(sentinel_index++);
            input_tokens.push_back(mark);
            target_tokens.push_back(mark);
            while (p < positions.size() && positions[p] == i) {
                target_tokens.push_back(tokens[i]);
                ++p;
                ++i;
            }
        } else {
            input_tokens.push_back(tokens[i]);
            ++i;
        }
    }
    rec.input = tok.detokenize(input_tokens);
    rec.target = tok.detokenize(target_tokens);
    return rec;
}

PretrainRecord make_span_denoise(const LabeledExample& example, const TokenizerContract& tok,
                                 double noise_rate, uint64_t rng_seed,
                                 const IntentTextConfig& cfg) {
    require_labeled(example);
    if (noise_rate < 0.0 || noise_rate >= 1.0) {
        throw std::invalid_argument("span_denoise: noise_rate must lie in [0,1)");
    }
    const std::string sequence = example.utterance + kLabelSeparator + natural_label_for(example, cfg);
    const size_t n = tok.tokenize(sequence).size();
    size_t k = 0;
    if (noise_rate > 0.0) {
        k = static_cast<size_t>(std::llround(noise_rate * static_cast<double>(n)));
        k = std::max<size_t>(1, std::min(k, n));
    }
    Rng rng(mix_seed(rng_seed, "span-noise"));
    return span_denoise_at_positions(example, tok, sample_indices(rng, n, k), cfg);
}

PretrainRecord make_label_denoise(const LabeledExample& example, const TokenizerContract& tok,
                                  const IntentTextConfig& cfg) {
    require_labeled(example);
    PretrainRecord rec;
    rec.format = RecordFormat::label_denoise;
    rec.source_id = example.id;
    rec.input = example.utterance + kLabelSeparator + tok.sentinel(0);
    rec.target = tok.sentinel(0) + " " + natural_label_for(example, cfg);
    return rec;
}

PretrainRecord make_ic_record(const LabeledExample& example, const IntentTextConfig& cfg) {
    require_labeled(example);
    PretrainRecord rec;
    rec.format = RecordFormat::ic;
    rec.source_id = example.id;
    rec.input = std::string(kTaskPrefix) + example.utterance;
    rec.target = natural_label_for(example, cfg);
    return rec;
}

PretrainRecord make_finetune_record(const LabeledExample& example, const IntentTextConfig& cfg) {
    PretrainRecord rec = make_ic_record(example, cfg);
    rec.format = RecordFormat::finetune;
    return rec;
}

PretrainRecord make_label_denoise_ft_record(const LabeledExample& example,
                                            const TokenizerContract& tok,
                                            const IntentTextConfig& cfg) {
    PretrainRecord rec = make_label_denoise(example, tok, cfg);
    rec.format = RecordFormat::label_denoise_ft;
    return rec;
}

PretrainRecord make_joint_icsl_record(const LabeledExample& example, const IntentTextConfig& cfg) {
    require_labeled(example);
    example.validate();  // rejects overlapping or out-of-bounds slots

    std::vector<SlotSpan> slots = example.slots;
    std::sort(slots.begin(), slots.end(),
              [](const SlotSpan& a, const SlotSpan& b) { return a.start < b.start; });

    std::string decorated;
    size_t pos = 0;
    for (const auto& s : slots) {
        decorated += example.utterance.substr(pos, static_cast<size_t>(s.start) - pos);
        decorated += "[ ";
        decorated += example.utterance.substr(static_cast<size_t>(s.start),
                                              static_cast<size_t>(s.end - s.start));
        decorated += " | " + s.label + " ]";
        pos = static_cast<size_t>(s.end);
    }
    decorated += example.utterance.substr(pos);

    PretrainRecord rec;
    rec.format = RecordFormat::joint_icsl;
    rec.source_id = example.id;
    rec.input = std::string(kParsePrefix) + example.utterance;
    rec.target = "[ " + decorated + " | " + natural_label_for(example, cfg) + " ]";
    return rec;
}

std::vector<PretrainRecord> format_corpus(const std::vector<LabeledExample>& corpus,
                                          RecordFormat format, const TokenizerContract& tok,
                                          double noise_rate, uint64_t global_seed,
                                          const IntentTextConfig& cfg) {
    std::vector<PretrainRecord> out;
    out.reserve(corpus.size());
    for (const auto& ex : corpus) {
        switch (format) {
            case RecordFormat::span_denoise:
                out.push_back(make_span_denoise(ex, tok, noise_rate,
                                                mix_seed(global_seed, ex.id), cfg));
                break;
            case RecordFormat::ic:
                out.push_back(make_ic_record(ex, cfg));
                break;
            case RecordFormat::label_denoise:
                out.push_back(make_label_denoise(ex, tok, cfg));
                break;
            case RecordFormat::finetune:
                out.push_back(make_finetune_record(ex, cfg));
                break;
            case RecordFormat::label_denoise_ft:
                out.push_back(make_label_denoise_ft_record(ex, tok, cfg));
                break;
            case RecordFormat::joint_icsl:
                out.push_back(make_joint_icsl_record(ex, cfg));
                break;
        }
    }
    return out;
}

void write_records(const std::vector<PretrainRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_records: cannot open '" + path + "' for writing");
    for (const auto& r : records) {
        json j;
        j["input"] = r.input;
        j["target"] = r.target;
        j["format"] = format_name(r.format);
        j["source_id"] = r.source_id;
        out << j.dump() << "\n";
    }
}

std::vector<PretrainRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_records: cannot open '" + path + "'");
    std::vector<PretrainRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            throw std::runtime_error("records line " + std::to_string(line_no) + ": invalid JSON");
        }
        PretrainRecord r;
        try {
            r.input = j.at("input").get<std::string>();
            r.target = j.at("target").get<std::string>();
            const std::string f = j.at("format").get<std::string>();
            auto fmt = format_from_name(f);
            if (!fmt) {
                throw std::runtime_error("unknown format '" + f + "'");
            }
            r.format = *fmt;
            r.source_id = j.at("source_id").get<std::string>();
        } catch (const json::exception& e) {
            throw std::runtime_error("records line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lsap
