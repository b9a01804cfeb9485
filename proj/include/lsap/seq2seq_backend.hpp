#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lsap/formats.hpp"
#include "lsap/tokenizer.hpp"

namespace lsap {

struct Hyperparams {
    double learning_rate = 5e-4;
    int batch_size = 128;
    int epochs = 3;
    uint64_t seed = 0;

    void validate() const;
};

struct TrainStats {
    double final_loss = 0.0;  // mean per-token loss over the last epoch
    int64_t steps = 0;
    int64_t examples_seen = 0;
};

class Seq2SeqHandle {
  public:
    virtual ~Seq2SeqHandle() = default;
};

using Seq2SeqHandlePtr = std::shared_ptr<const Seq2SeqHandle>;

// Pluggable sequence-to-sequence model. generate() is greedy and
// deterministic for a fixed handle; train() with equal records, hyperparams,
// and seed reproduces the same handle behavior.
class Seq2SeqBackend {
  public:
    virtual ~Seq2SeqBackend() = default;

    // base == nullptr trains from scratch; otherwise continues from base
    // (fine-tuning), keeping its vocabulary.
    virtual Seq2SeqHandlePtr train(const std::vector<PretrainRecord>& records,
                                   const Hyperparams& hp,
                                   const Seq2SeqHandlePtr& base = nullptr) = 0;
    virtual std::vector<std::string> generate(const Seq2SeqHandlePtr& handle,
                                              const std::vector<std::string>& inputs) const = 0;
    virtual const TokenizerContract& tokenizer() const = 0;
    virtual TrainStats stats(const Seq2SeqHandlePtr& handle) const = 0;
    virtual void save(const Seq2SeqHandlePtr& handle, const std::string& path) const = 0;
    virtual Seq2SeqHandlePtr load(const std::string& path) const = 0;
};

}  // namespace lsap
