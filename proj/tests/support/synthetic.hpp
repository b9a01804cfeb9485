#pragma once

// Synthetic templated corpora for desk-scale training checks. Intents are
// verb-object combinations; the evaluation set holds out five combinations
// whose verbs and objects all occur in pre-training, so label semantics can
// transfer while the label strings themselves stay disjoint.

#include <string>
#include <vector>

#include "lsap/corpus.hpp"
#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap::synth {

inline const std::vector<std::string> kVerbs = {"book", "cancel", "find",     "play", "order",
                                                "check", "rate",  "schedule", "buy",  "track"};
inline const std::vector<std::string> kObjects = {"flight", "hotel",   "taxi",   "movie",
                                                  "pizza",  "account", "song",   "meeting",
                                                  "ticket", "package", "table",  "cab"};

struct Combo {
    std::string verb;
    std::string object;

    std::string raw_intent() const {
        auto cap = [](std::string w) {
            w[0] = static_cast<char>(w[0] - 'a' + 'A');
            return w;
        };
        return cap(verb) + cap(object);
    }
};

inline const std::vector<Combo> kEvalCombos = {{"book", "hotel"},
                                               {"cancel", "flight"},
                                               {"find", "pizza"},
                                               {"play", "movie"},
                                               {"order", "song"}};

inline std::vector<Combo> pretrain_combos(size_t count) {
    std::vector<Combo> out;
    for (const auto& v : kVerbs) {
        for (const auto& o : kObjects) {
            bool held_out = false;
            for (const auto& e : kEvalCombos) {
                if (e.verb == v && e.object == o) held_out = true;
            }
            if (!held_out) out.push_back({v, o});
            if (out.size() == count) return out;
        }
    }
    return out;
}

inline std::string render_utterance(const Combo& c, Rng& rng) {
    static const std::vector<std::string> templates = {
        "please {v} a {o} for me",      "i want to {v} the {o}",
        "can you {v} my {o}",           "{v} a {o} now",
        "could you please {v} that {o}", "i need to {v} a {o} today",
        "help me {v} the {o}",          "{v} the {o} please",
        "would you {v} a {o} for us",   "i would like to {v} my {o}"};
    static const std::vector<std::string> suffixes = {"",          "thanks",   "right away",
                                                      "tomorrow",  "tonight",  "as soon as possible",
                                                      "if you can", "quickly"};
    std::string text = templates[rand_below(rng, templates.size())];
    const std::string suffix = suffixes[rand_below(rng, suffixes.size())];
    auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
        size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, from.size(), to);
            pos += to.size();
        }
        return s;
    };
    text = replace_all(text, "{v}", c.verb);
    text = replace_all(text, "{o}", c.object);
    if (!suffix.empty()) text += " " + suffix;
    return text;
}

inline std::vector<LabeledExample> make_corpus(const std::vector<Combo>& combos,
                                               int per_combo, uint64_t seed,
                                               const std::string& source) {
    std::vector<LabeledExample> out;
    Rng rng(mix_seed(seed, "synth:" + source));
    int serial = 0;
    for (const auto& combo : combos) {
        for (int i = 0; i < per_combo; ++i) {
            LabeledExample ex;
            ex.id = source + "-" + std::to_string(serial++);
            ex.utterance = render_utterance(combo, rng);
            ex.intents = {combo.raw_intent()};
            ex.quality = Quality::gold;
            ex.source = source;
            out.push_back(std::move(ex));
        }
    }
    return out;
}

}  // namespace lsap::synth
