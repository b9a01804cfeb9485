#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsap {

enum class Quality { gold, silver, bronze, unlabeled };

std::string quality_name(Quality q);
std::optional<Quality> quality_from_name(const std::string& name);

struct SlotSpan {
    int start = 0;  // character offset
    int end = 0;    // exclusive
    std::string label;

    bool operator==(const SlotSpan&) const = default;
};

// One utterance with its labels. Immutable by convention after construction;
// validate() enforces the structural invariants.
struct LabeledExample {
    std::string id;
    std::string utterance;
    std::vector<std::string> intents;  // empty iff quality == unlabeled
    std::vector<SlotSpan> slots;
    Quality quality = Quality::unlabeled;
    std::string source;

    bool operator==(const LabeledExample&) const = default;

    // Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

struct CorpusManifest {
    std::string name;
    std::string path;
    uint64_t count = 0;
    std::map<std::string, uint64_t> quality_histogram;
    std::string checksum;  // fnv1a-64 hex of file bytes
};

struct IngestResult {
    std::vector<LabeledExample> examples;
    uint64_t skipped_missing_utterance = 0;
    uint64_t skipped_malformed = 0;
};

// field_map maps schema fields ("utterance", "intent", "intents", "id",
// "source") to keys in the raw JSON records. "utterance" is mandatory.
// An "intent" value containing '#' denotes multiple intents and is split.
// Ids are synthesized as "<source>-NNNNNN" when no id key is mapped.
IngestResult ingest_generic_jsonl(const std::string& path,
                                  const std::map<std::string, std::string>& field_map,
                                  const std::string& source_name,
                                  Quality labeled_quality = Quality::gold);

struct DedupeResult {
    std::vector<LabeledExample> kept;
    uint64_t removed = 0;
};

// Removes corpus entries whose normalized utterance appears in any eval set.
DedupeResult dedupe_against_eval(const std::vector<LabeledExample>& corpus,
                                 const std::vector<std::vector<LabeledExample>>& eval_sets);

CorpusManifest write_corpus(const std::vector<LabeledExample>& examples,
                            const std::string& path,
                            const std::string& name = "");
std::vector<LabeledExample> read_corpus(const std::string& path);

std::string file_checksum(const std::string& path);
std::string manifest_path_for(const std::string& corpus_path);

}  // namespace lsap
