#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsap/seq2seq_backend.hpp"

namespace lsap {

struct TinySeq2SeqOptions {
    int d_model = 96;
    int n_heads = 4;
    int enc_layers = 2;
    int dec_layers = 2;
    int ff_mult = 4;
    int max_src_len = 96;
    int max_tgt_len = 48;
    int max_gen_len = 24;
    float init_std = 0.02f;
    float grad_clip = 1.0f;
    float adam_beta1 = 0.9f;
    float adam_beta2 = 0.999f;
    float adam_eps = 1e-8f;
    // Worker threads for batching and generation. Gradients reduce over a
    // fixed number of logical chunks, so results are identical for any
    // thread count.
    int threads = 0;  // 0 = hardware concurrency, capped at 4
    int grad_chunks = 8;
};

// Word-level encoder-decoder transformer trained on CPU. Pre-LN blocks,
// learned positions, shared source/target embedding, Adam. Deterministic:
// seeded init, portable shuffles, fixed-order gradient reduction, greedy
// decoding with first-max tie break.
class TinyTransformerBackend : public Seq2SeqBackend {
  public:
    explicit TinyTransformerBackend(TinySeq2SeqOptions options = {});

    Seq2SeqHandlePtr train(const std::vector<PretrainRecord>& records, const Hyperparams& hp,
                           const Seq2SeqHandlePtr& base = nullptr) override;
    std::vector<std::string> generate(const Seq2SeqHandlePtr& handle,
                                      const std::vector<std::string>& inputs) const override;
    const TokenizerContract& tokenizer() const override { return tokenizer_; }
    TrainStats stats(const Seq2SeqHandlePtr& handle) const override;
    void save(const Seq2SeqHandlePtr& handle, const std::string& path) const override;
    Seq2SeqHandlePtr load(const std::string& path) const override;

    // Total learnable parameter count for the model a handle carries.
    static int64_t parameter_count(const Seq2SeqHandlePtr& handle);

  private:
    TinySeq2SeqOptions options_;
    WordTokenizer tokenizer_;
};

}  // namespace lsap
