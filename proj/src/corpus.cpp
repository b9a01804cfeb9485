#include "lsap/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

using json = nlohmann::json;

std::string quality_name(Quality q) {
    switch (q) {
        case Quality::gold: return "gold";
        case Quality::silver: return "silver";
        case Quality::bronze: return "bronze";
        case Quality::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

std::optional<Quality> quality_from_name(const std::string& name) {
    if (name == "gold") return Quality::gold;
    if (name == "silver") return Quality::silver;
    if (name == "bronze") return Quality::bronze;
    if (name == "unlabeled") return Quality::unlabeled;
    return std::nullopt;
}

void LabeledExample::validate() const {
    if (trim(utterance).empty()) {
        throw std::invalid_argument("example '" + id + "': utterance is empty");
    }
    if (intents.empty() != (quality == Quality::unlabeled)) {
        throw std::invalid_argument("example '" + id +
                                    "': quality must be 'unlabeled' exactly when intents is empty");
    }
    for (const auto& intent : intents) {
        if (intent.empty()) {
            throw std::invalid_argument("example '" + id + "': empty intent identifier");
        }
    }
    const int len = static_cast<int>(utterance.size());
    std::vector<SlotSpan> sorted = slots;
    std::sort(sorted.begin(), sorted.end(),
              [](const SlotSpan& a, const SlotSpan& b) { return a.start < b.start; });
    int prev_end = 0;
    for (const auto& s : sorted) {
        if (s.start < 0 || s.start >= s.end || s.end > len) {
            throw std::invalid_argument("example '" + id + "': slot span [" +
                                        std::to_string(s.start) + "," + std::to_string(s.end) +
                                        ") out of bounds");
        }
        if (s.start < prev_end) {
            throw std::invalid_argument("example '" + id + "': overlapping slot spans");
        }
        prev_end = s.end;
    }
}

namespace {

std::string synth_id(const std::string& source, uint64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(index));
    return source + "-" + buf;
}

json example_to_json(const LabeledExample& ex) {
    json j;
    j["id"] = ex.id;
    j["utterance"] = ex.utterance;
    j["intents"] = ex.intents;
    if (!ex.slots.empty()) {
        json spans = json::array();
        for (const auto& s : ex.slots) {
            spans.push_back({{"start", s.start}, {"end", s.end}, {"label", s.label}});
        }
        j["slots"] = spans;
    }
    j["quality"] = quality_name(ex.quality);
    j["source"] = ex.source;
    return j;
}

LabeledExample example_from_json(const json& j, size_t line_no) {
    auto fail = [line_no](const std::string& msg) -> std::runtime_error {
        return std::runtime_error("corpus line " + std::to_string(line_no) + ": " + msg);
    };
    if (!j.is_object()) throw fail("record is not an object");
    LabeledExample ex;
    try {
        ex.id = j.at("id").get<std::string>();
        ex.utterance = j.at("utterance").get<std::string>();
        ex.intents = j.at("intents").get<std::vector<std::string>>();
        const std::string q = j.at("quality").get<std::string>();
        auto quality = quality_from_name(q);
        if (!quality) throw fail("invalid quality value '" + q + "'");
        ex.quality = *quality;
        ex.source = j.at("source").get<std::string>();
        if (j.contains("slots")) {
            for (const auto& s : j.at("slots")) {
                ex.slots.push_back({s.at("start").get<int>(), s.at("end").get<int>(),
                                    s.at("label").get<std::string>()});
            }
        }
    } catch (const json::exception& e) {
        throw fail(e.what());
    }
    try {
        ex.validate();
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
    return ex;
}

}  // namespace

IngestResult ingest_generic_jsonl(const std::string& path,
                                  const std::map<std::string, std::string>& field_map,
                                  const std::string& source_name,
                                  Quality labeled_quality) {
    auto utt_it = field_map.find("utterance");
    if (utt_it == field_map.end()) {
        throw std::invalid_argument("ingest: field_map must map 'utterance'");
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open '" + path + "'");

    IngestResult result;
    uint64_t total_lines = 0;
    uint64_t running_index = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++total_lines;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            ++result.skipped_malformed;
            continue;
        }
        if (!j.contains(utt_it->second) || !j[utt_it->second].is_string()) {
            ++result.skipped_missing_utterance;
            continue;
        }
        LabeledExample ex;
        ex.utterance = trim(j[utt_it->second].get<std::string>());
        if (ex.utterance.empty()) {
            ++result.skipped_missing_utterance;
            continue;
        }
        ex.source = source_name;

        if (auto it = field_map.find("intents"); it != field_map.end() &&
            j.contains(it->second) && j[it->second].is_array()) {
            for (const auto& v : j[it->second]) {
                if (v.is_string() && !v.get<std::string>().empty()) {
                    ex.intents.push_back(v.get<std::string>());
                }
            }
        } else if (auto it2 = field_map.find("intent"); it2 != field_map.end() &&
                   j.contains(it2->second) && j[it2->second].is_string()) {
            // ATIS-style dumps join multiple intents with '#'.
            for (const auto& part : split_on(j[it2->second].get<std::string>(), "#")) {
                std::string t = trim(part);
                if (!t.empty()) ex.intents.push_back(t);
            }
        }
        ex.quality = ex.intents.empty() ? Quality::unlabeled : labeled_quality;

        if (auto it = field_map.find("id"); it != field_map.end() &&
            j.contains(it->second) && j[it->second].is_string()) {
            ex.id = j[it->second].get<std::string>();
        } else {
            ex.id = synth_id(source_name, running_index);
        }
        if (auto it = field_map.find("source"); it != field_map.end() &&
            j.contains(it->second) && j[it->second].is_string()) {
            ex.source = j[it->second].get<std::string>();
        }
        ++running_index;
        result.examples.push_back(std::move(ex));
    }
    // Systemic schema mismatch: >10% malformed. A couple of bad lines in a
    // small file is ordinary web-dump noise, so the guard needs at least 3.
    if (result.skipped_malformed >= 3 && result.skipped_malformed * 10 > total_lines) {
        throw std::runtime_error("ingest: " + std::to_string(result.skipped_malformed) + " of " +
                                 std::to_string(total_lines) +
                                 " lines malformed (>10%), schema mismatch in '" + path + "'");
    }
    return result;
}

DedupeResult dedupe_against_eval(const std::vector<LabeledExample>& corpus,
                                 const std::vector<std::vector<LabeledExample>>& eval_sets) {
    std::unordered_set<std::string> blocked;
    for (const auto& set : eval_sets) {
        for (const auto& ex : set) blocked.insert(normalize_utterance(ex.utterance));
    }
    DedupeResult out;
    out.kept.reserve(corpus.size());
    for (const auto& ex : corpus) {
        if (blocked.count(normalize_utterance(ex.utterance))) {
            ++out.removed;
        } else {
            out.kept.push_back(ex);
        }
    }
    return out;
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checksum: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string manifest_path_for(const std::string& corpus_path) {
    return corpus_path + ".manifest.json";
}

CorpusManifest write_corpus(const std::vector<LabeledExample>& examples,
                            const std::string& path,
                            const std::string& name) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("write_corpus: cannot open '" + path + "' for writing");
        for (const auto& ex : examples) {
            ex.validate();
            out << example_to_json(ex).dump() << "\n";
        }
    }
    CorpusManifest m;
    m.name = name.empty() ? path : name;
    m.path = path;
    m.count = examples.size();
    for (const auto& ex : examples) m.quality_histogram[quality_name(ex.quality)]++;
    m.checksum = file_checksum(path);

    json mj;
    mj["name"] = m.name;
    mj["path"] = m.path;
    mj["count"] = m.count;
    mj["quality_histogram"] = m.quality_histogram;
    mj["checksum"] = m.checksum;
    std::ofstream mout(manifest_path_for(path), std::ios::binary);
    if (!mout) throw std::runtime_error("write_corpus: cannot write manifest for '" + path + "'");
    mout << mj.dump(2) << "\n";
    return m;
}

std::vector<LabeledExample> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_corpus: cannot open '" + path + "'");
    std::vector<LabeledExample> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            throw std::runtime_error("corpus line " + std::to_string(line_no) + ": invalid JSON");
        }
        out.push_back(example_from_json(j, line_no));
    }
    return out;
}

}  // namespace lsap
