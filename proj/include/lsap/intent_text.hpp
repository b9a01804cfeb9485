#pragma once

#include <string>
#include <vector>

namespace lsap {

struct LabeledExample;

struct IntentTextConfig {
    // Dataset prefixes stripped from raw identifiers before splitting,
    // e.g. {"atis_"}. Matched case-insensitively at the start of the id.
    std::vector<std::string> strip_prefixes;
};

// Converts a raw intent identifier ("BookFlight", "atis_flight") to its
// natural-language label ("Book flight", "Flight"). Idempotent.
std::string naturalize_intent(const std::string& raw, const IntentTextConfig& cfg = {});

// Joins multiple natural labels with " # "; later components get a lowercase
// leading character ("Book flight # airfare"). Singleton lists pass through.
std::string join_multi_intent(const std::vector<std::string>& labels);

// naturalize + join over an example's intent list.
std::string natural_label_for(const LabeledExample& ex, const IntentTextConfig& cfg = {});

}  // namespace lsap
