#include "lsap/seq2seq_tiny.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "lsap/autograd.hpp"
#include "lsap/rng_util.hpp"
#include "lsap/text_util.hpp"

namespace lsap {

using ag::Mat;

namespace {

struct Vocab {
    static constexpr int kPad = 0, kBos = 1, kEos = 2, kUnk = 3;
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> index;

    static Vocab build(const std::vector<PretrainRecord>& records, const TokenizerContract& tok) {
        std::set<std::string> words;
        for (const auto& r : records) {
            for (auto& w : tok.tokenize(r.input)) words.insert(std::move(w));
            for (auto& w : tok.tokenize(r.target)) words.insert(std::move(w));
        }
        Vocab v;
        v.tokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
        v.tokens.insert(v.tokens.end(), words.begin(), words.end());
        for (size_t i = 0; i < v.tokens.size(); ++i) v.index[v.tokens[i]] = static_cast<int>(i);
        return v;
    }

    int id(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? kUnk : it->second;
    }
    int size() const { return static_cast<int>(tokens.size()); }
};

struct AttnWeights {
    int wq = -1, wk = -1, wv = -1, wo = -1;
};

struct BlockLayout {
    int ln1_g = -1, ln1_b = -1;
    AttnWeights self_attn;
    int ln2_g = -1, ln2_b = -1;
    AttnWeights cross_attn;  // decoder only
    int ln3_g = -1, ln3_b = -1;
    int ff_w1 = -1, ff_b1 = -1, ff_w2 = -1, ff_b2 = -1;
};

struct Layout {
    int tok_emb = -1, pos_enc = -1, pos_dec = -1;
    std::vector<BlockLayout> enc, dec;
    int enc_ln_g = -1, enc_ln_b = -1, dec_ln_g = -1, dec_ln_b = -1;
    int out_w = -1, out_b = -1;
};

struct TinyModel : Seq2SeqHandle {
    TinySeq2SeqOptions opt;
    Vocab vocab;
    std::vector<Mat> params;
    Layout layout;
    TrainStats train_stats;

    int dec_pos_rows() const { return opt.max_tgt_len + opt.max_gen_len + 2; }
};

struct ShapeBuilder {
    std::vector<std::pair<int, int>> shapes;
    int add(int rows, int cols) {
        shapes.push_back({rows, cols});
        return static_cast<int>(shapes.size()) - 1;
    }
};

AttnWeights add_attention(ShapeBuilder& b, int d) {
    return {b.add(d, d), b.add(d, d), b.add(d, d), b.add(d, d)};
}

Layout build_layout(ShapeBuilder& b, const TinySeq2SeqOptions& opt, int vocab_size,
                    int dec_pos_rows) {
    const int d = opt.d_model;
    const int ff = opt.ff_mult * d;
    Layout lay;
    lay.tok_emb = b.add(vocab_size, d);
    lay.pos_enc = b.add(opt.max_src_len, d);
    lay.pos_dec = b.add(dec_pos_rows, d);
    for (int i = 0; i < opt.enc_layers; ++i) {
        BlockLayout blk;
        blk.ln1_g = b.add(1, d);
        blk.ln1_b = b.add(1, d);
        blk.self_attn = add_attention(b, d);
        blk.ln2_g = b.add(1, d);
        blk.ln2_b = b.add(1, d);
        blk.ff_w1 = b.add(d, ff);
        blk.ff_b1 = b.add(1, ff);
        blk.ff_w2 = b.add(ff, d);
        blk.ff_b2 = b.add(1, d);
        lay.enc.push_back(blk);
    }
    for (int i = 0; i < opt.dec_layers; ++i) {
        BlockLayout blk;
        blk.ln1_g = b.add(1, d);
        blk.ln1_b = b.add(1, d);
        blk.self_attn = add_attention(b, d);
        blk.ln2_g = b.add(1, d);
        blk.ln2_b = b.add(1, d);
        blk.cross_attn = add_attention(b, d);
        blk.ln3_g = b.add(1, d);
        blk.ln3_b = b.add(1, d);
        blk.ff_w1 = b.add(d, ff);
        blk.ff_b1 = b.add(1, ff);
        blk.ff_w2 = b.add(ff, d);
        blk.ff_b2 = b.add(1, d);
        lay.dec.push_back(blk);
    }
    lay.enc_ln_g = b.add(1, d);
    lay.enc_ln_b = b.add(1, d);
    lay.dec_ln_g = b.add(1, d);
    lay.dec_ln_b = b.add(1, d);
    lay.out_w = b.add(d, vocab_size);
    lay.out_b = b.add(1, vocab_size);
    return lay;
}

bool is_layer_norm_gain(const Layout& lay, int idx) {
    auto in_block = [idx](const BlockLayout& b) {
        return idx == b.ln1_g || idx == b.ln2_g || idx == b.ln3_g;
    };
    if (idx == lay.enc_ln_g || idx == lay.dec_ln_g) return true;
    for (const auto& b : lay.enc) {
        if (in_block(b)) return true;
    }
    for (const auto& b : lay.dec) {
        if (in_block(b)) return true;
    }
    return false;
}

bool is_bias(const Layout& lay, int idx) {
    auto in_block = [idx](const BlockLayout& b) {
        return idx == b.ln1_b || idx == b.ln2_b || idx == b.ln3_b || idx == b.ff_b1 ||
               idx == b.ff_b2;
    };
    if (idx == lay.enc_ln_b || idx == lay.dec_ln_b || idx == lay.out_b) return true;
    for (const auto& b : lay.enc) {
        if (in_block(b)) return true;
    }
    for (const auto& b : lay.dec) {
        if (in_block(b)) return true;
    }
    return false;
}

std::shared_ptr<TinyModel> init_model(const TinySeq2SeqOptions& opt, Vocab vocab, uint64_t seed) {
    auto model = std::make_shared<TinyModel>();
    model->opt = opt;
    model->vocab = std::move(vocab);
    ShapeBuilder shapes;
    model->layout = build_layout(shapes, opt, model->vocab.size(), model->dec_pos_rows());
    model->params.reserve(shapes.shapes.size());
    Rng rng(mix_seed(seed, "init"));
    for (size_t i = 0; i < shapes.shapes.size(); ++i) {
        auto [rows, cols] = shapes.shapes[i];
        Mat m(rows, cols);
        if (is_layer_norm_gain(model->layout, static_cast<int>(i))) {
            m.setOnes();
        } else if (is_bias(model->layout, static_cast<int>(i))) {
            m.setZero();
        } else {
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) m(r, c) = rand_normal(rng, 0.0f, opt.init_std);
            }
        }
        model->params.push_back(std::move(m));
    }
    return model;
}

// Tokenized training example.
struct Encoded {
    std::vector<int> src;
    std::vector<int> dec_in;   // <bos> + target
    std::vector<int> dec_out;  // target + <eos>
};

std::vector<int> encode_text(const std::string& text, const TokenizerContract& tok,
                             const Vocab& vocab, int max_len) {
    std::vector<int> ids;
    for (const auto& w : tok.tokenize(text)) {
        if (static_cast<int>(ids.size()) >= max_len) break;
        ids.push_back(vocab.id(w));
    }
    if (ids.empty()) ids.push_back(Vocab::kUnk);
    return ids;
}

Encoded encode_record(const PretrainRecord& r, const TokenizerContract& tok, const Vocab& vocab,
                      const TinySeq2SeqOptions& opt) {
    Encoded e;
    e.src = encode_text(r.input, tok, vocab, opt.max_src_len);
    std::vector<int> tgt;
    for (const auto& w : tok.tokenize(r.target)) {
        if (static_cast<int>(tgt.size()) >= opt.max_tgt_len) break;
        tgt.push_back(vocab.id(w));
    }
    e.dec_in.push_back(Vocab::kBos);
    e.dec_in.insert(e.dec_in.end(), tgt.begin(), tgt.end());
    e.dec_out = tgt;
    e.dec_out.push_back(Vocab::kEos);
    return e;
}

// Builds the forward graph. With a grad sink the parameters participate in
// backward; without one the graph is inference-only and shares parameter
// storage via cref.
struct Forward {
    ag::Tape tape;
    const TinyModel& model;
    std::vector<Mat>* grads;
    std::vector<ag::Node*> cache;

    Forward(const TinyModel& m, std::vector<Mat>* g)
        : model(m), grads(g), cache(m.params.size(), nullptr) {}

    ag::Node* P(int idx) {
        if (!cache[idx]) {
            cache[idx] = grads ? tape.param(model.params[idx], (*grads)[idx])
                               : tape.cref(model.params[idx]);
        }
        return cache[idx];
    }

    ag::Node* attention_block(ag::Node* x_norm, ag::Node* kv_source, const AttnWeights& w,
                              bool causal) {
        ag::Node* q = tape.matmul(x_norm, P(w.wq));
        ag::Node* k = tape.matmul(kv_source, P(w.wk));
        ag::Node* v = tape.matmul(kv_source, P(w.wv));
        ag::Node* a = tape.attention(q, k, v, model.opt.n_heads, causal);
        return tape.matmul(a, P(w.wo));
    }

    ag::Node* feed_forward(ag::Node* x_norm, const BlockLayout& blk) {
        ag::Node* h = tape.relu(tape.add_row(tape.matmul(x_norm, P(blk.ff_w1)), P(blk.ff_b1)));
        return tape.add_row(tape.matmul(h, P(blk.ff_w2)), P(blk.ff_b2));
    }

    ag::Node* embed(const std::vector<int>& ids, int pos_table) {
        ag::Node* tok = tape.embedding(P(model.layout.tok_emb), ids);
        std::vector<int> positions(ids.size());
        for (size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
        ag::Node* pos = tape.embedding(P(pos_table), positions);
        return tape.add(tok, pos);
    }

    ag::Node* encoder(const std::vector<int>& src) {
        ag::Node* x = embed(src, model.layout.pos_enc);
        for (const auto& blk : model.layout.enc) {
            ag::Node* h = tape.layer_norm(x, P(blk.ln1_g), P(blk.ln1_b));
            x = tape.add(x, attention_block(h, h, blk.self_attn, /*causal=*/false));
            ag::Node* h2 = tape.layer_norm(x, P(blk.ln2_g), P(blk.ln2_b));
            x = tape.add(x, feed_forward(h2, blk));
        }
        return tape.layer_norm(x, P(model.layout.enc_ln_g), P(model.layout.enc_ln_b));
    }

    // Returns the final decoder hidden states (before the output projection).
    ag::Node* decoder(const std::vector<int>& dec_in, ag::Node* enc_out) {
        ag::Node* x = embed(dec_in, model.layout.pos_dec);
        for (const auto& blk : model.layout.dec) {
            ag::Node* h = tape.layer_norm(x, P(blk.ln1_g), P(blk.ln1_b));
            x = tape.add(x, attention_block(h, h, blk.self_attn, /*causal=*/true));
            ag::Node* h2 = tape.layer_norm(x, P(blk.ln2_g), P(blk.ln2_b));
            x = tape.add(x, attention_block(h2, enc_out, blk.cross_attn, /*causal=*/false));
            ag::Node* h3 = tape.layer_norm(x, P(blk.ln3_g), P(blk.ln3_b));
            x = tape.add(x, feed_forward(h3, blk));
        }
        return tape.layer_norm(x, P(model.layout.dec_ln_g), P(model.layout.dec_ln_b));
    }

    ag::Node* logits(ag::Node* dec_hidden) {
        return tape.add_row(tape.matmul(dec_hidden, P(model.layout.out_w)),
                            P(model.layout.out_b));
    }
};

float example_loss_and_grad(const TinyModel& model, std::vector<Mat>& grads, const Encoded& ex) {
    Forward f(model, &grads);
    ag::Node* enc_out = f.encoder(ex.src);
    ag::Node* dec = f.decoder(ex.dec_in, enc_out);
    ag::Node* loss = f.tape.cross_entropy(f.logits(dec), ex.dec_out);
    const float value = loss->value()(0, 0);
    f.tape.backward(loss);
    return value;
}

int resolve_threads(const TinySeq2SeqOptions& opt) {
    if (opt.threads > 0) return opt.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 4u));
}

// Runs fn(chunk_index) for every chunk, spreading chunks over `threads`.
void parallel_chunks(int n_chunks, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n_chunks <= 1) {
        for (int c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n_chunks);
    pool.reserve(static_cast<size_t>(workers));
    std::exception_ptr error;
    std::mutex error_mu;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int c = next.fetch_add(1);
                if (c >= n_chunks) break;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

const TinyModel& as_tiny(const Seq2SeqHandlePtr& handle, const char* where) {
    const auto* m = dynamic_cast<const TinyModel*>(handle.get());
    if (!m) throw std::invalid_argument(std::string(where) + ": invalid or foreign handle");
    return *m;
}

}  // namespace

void Hyperparams::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("hyperparams: learning_rate must be positive");
    if (batch_size <= 0) throw std::invalid_argument("hyperparams: batch_size must be positive");
    if (epochs <= 0) throw std::invalid_argument("hyperparams: epochs must be positive");
}

TinyTransformerBackend::TinyTransformerBackend(TinySeq2SeqOptions options)
    : options_(options) {
    if (options_.d_model % options_.n_heads != 0) {
        throw std::invalid_argument("seq2seq options: d_model must be divisible by n_heads");
    }
}

Seq2SeqHandlePtr TinyTransformerBackend::train(const std::vector<PretrainRecord>& records,
                                               const Hyperparams& hp,
                                               const Seq2SeqHandlePtr& base) {
    hp.validate();
    if (records.empty()) throw std::invalid_argument("seq2seq train: no records");

    std::shared_ptr<TinyModel> model;
    if (base) {
        model = std::make_shared<TinyModel>(as_tiny(base, "seq2seq train"));
    } else {
        model = init_model(options_, Vocab::build(records, tokenizer_), hp.seed);
    }

    std::vector<Encoded> data;
    data.reserve(records.size());
    for (const auto& r : records) {
        data.push_back(encode_record(r, tokenizer_, model->vocab, model->opt));
    }

    const int threads = resolve_threads(options_);
    const int n_chunks = std::max(1, options_.grad_chunks);
    std::vector<std::vector<Mat>> chunk_grads(static_cast<size_t>(n_chunks));
    for (auto& g : chunk_grads) {
        g.reserve(model->params.size());
        for (const auto& p : model->params) g.push_back(Mat::Zero(p.rows(), p.cols()));
    }
    std::vector<Mat> grad(model->params.size()), adam_m(model->params.size()),
        adam_v(model->params.size());
    for (size_t i = 0; i < model->params.size(); ++i) {
        grad[i] = Mat::Zero(model->params[i].rows(), model->params[i].cols());
        adam_m[i] = grad[i];
        adam_v[i] = grad[i];
    }

    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng order_rng(mix_seed(hp.seed, "order"));

    int64_t step = 0;
    double last_epoch_loss = 0.0;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_vec(order, order_rng);
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(hp.batch_size)) {
            const size_t batch = std::min(order.size() - start, static_cast<size_t>(hp.batch_size));
            const size_t per_chunk = (batch + n_chunks - 1) / n_chunks;
            std::vector<double> chunk_loss(static_cast<size_t>(n_chunks), 0.0);

            parallel_chunks(n_chunks, threads, [&](int c) {
                auto& grads = chunk_grads[static_cast<size_t>(c)];
                for (auto& g : grads) g.setZero();
                const size_t lo = static_cast<size_t>(c) * per_chunk;
                const size_t hi = std::min(batch, lo + per_chunk);
                for (size_t i = lo; i < hi; ++i) {
                    chunk_loss[static_cast<size_t>(c)] +=
                        example_loss_and_grad(*model, grads, data[order[start + i]]);
                }
            });

            // Fixed-order reduction keeps results identical for any thread count.
            const float inv_batch = 1.0f / static_cast<float>(batch);
            double batch_loss = 0.0;
            for (int c = 0; c < n_chunks; ++c) batch_loss += chunk_loss[static_cast<size_t>(c)];
            for (size_t p = 0; p < grad.size(); ++p) {
                grad[p].setZero();
                for (int c = 0; c < n_chunks; ++c) grad[p] += chunk_grads[static_cast<size_t>(c)][p];
                grad[p] *= inv_batch;
            }
            epoch_loss += batch_loss;

            if (model->opt.grad_clip > 0.0f) {
                double sq = 0.0;
                for (const auto& g : grad) sq += static_cast<double>(g.squaredNorm());
                const double norm = std::sqrt(sq);
                if (norm > model->opt.grad_clip) {
                    const float scale = static_cast<float>(model->opt.grad_clip / norm);
                    for (auto& g : grad) g *= scale;
                }
            }

            ++step;
            const float b1 = model->opt.adam_beta1, b2 = model->opt.adam_beta2;
            const float bc1 = 1.0f - std::pow(b1, static_cast<float>(step));
            const float bc2 = 1.0f - std::pow(b2, static_cast<float>(step));
            const float lr = static_cast<float>(hp.learning_rate);
            for (size_t p = 0; p < grad.size(); ++p) {
                adam_m[p] = b1 * adam_m[p] + (1.0f - b1) * grad[p];
                adam_v[p] =
                    (b2 * adam_v[p].array() + (1.0f - b2) * grad[p].array().square()).matrix();
                model->params[p].array() -=
                    lr * (adam_m[p].array() / bc1) /
                    ((adam_v[p].array() / bc2).sqrt() + model->opt.adam_eps);
            }
        }
        last_epoch_loss = epoch_loss / static_cast<double>(data.size());
    }

    model->train_stats.final_loss = last_epoch_loss;
    model->train_stats.steps = step;
    model->train_stats.examples_seen = static_cast<int64_t>(data.size()) * hp.epochs;
    return model;
}

std::vector<std::string> TinyTransformerBackend::generate(
    const Seq2SeqHandlePtr& handle, const std::vector<std::string>& inputs) const {
    const TinyModel& model = as_tiny(handle, "seq2seq generate");
    std::vector<std::string> outputs(inputs.size());

    auto decode_one = [&](size_t idx) {
        const std::vector<int> src =
            encode_text(inputs[idx], tokenizer_, model.vocab, model.opt.max_src_len);
        Mat enc_out;
        {
            Forward f(model, nullptr);
            enc_out = f.encoder(src)->value();
        }
        std::vector<int> dec_in = {Vocab::kBos};
        std::vector<std::string> words;
        for (int s = 0; s < model.opt.max_gen_len; ++s) {
            Forward f(model, nullptr);
            ag::Node* enc_node = f.tape.cref(enc_out);
            ag::Node* hidden = f.decoder(dec_in, enc_node);
            // Only the last position's logits matter; project it directly.
            const Eigen::RowVectorXf h = hidden->value().row(hidden->value().rows() - 1);
            const Eigen::RowVectorXf logits =
                h * model.params[model.layout.out_w] + model.params[model.layout.out_b].row(0);
            int best = 0;
            float best_v = logits(0);
            for (int t = 1; t < logits.size(); ++t) {
                if (logits(t) > best_v) {
                    best_v = logits(t);
                    best = t;
                }
            }
            if (best == Vocab::kEos || best == Vocab::kPad) break;
            dec_in.push_back(best);
            if (best != Vocab::kBos) words.push_back(model.vocab.tokens[static_cast<size_t>(best)]);
            if (static_cast<int>(dec_in.size()) >= model.dec_pos_rows()) break;
        }
        outputs[idx] = tokenizer_.detokenize(words);
    };

    const int threads = resolve_threads(options_);
    parallel_chunks(static_cast<int>(inputs.size()), threads,
                    [&](int i) { decode_one(static_cast<size_t>(i)); });
    return outputs;
}

TrainStats TinyTransformerBackend::stats(const Seq2SeqHandlePtr& handle) const {
    return as_tiny(handle, "seq2seq stats").train_stats;
}

int64_t TinyTransformerBackend::parameter_count(const Seq2SeqHandlePtr& handle) {
    const TinyModel& model = as_tiny(handle, "parameter_count");
    int64_t total = 0;
    for (const auto& p : model.params) total += static_cast<int64_t>(p.size());
    return total;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void TinyTransformerBackend::save(const Seq2SeqHandlePtr& handle, const std::string& path) const {
    const TinyModel& model = as_tiny(handle, "seq2seq save");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("seq2seq save: cannot write '" + path + "'");
    out.write("LSAPS2S1", 8);
    for (int v : {model.opt.d_model, model.opt.n_heads, model.opt.enc_layers,
                  model.opt.dec_layers, model.opt.ff_mult, model.opt.max_src_len,
                  model.opt.max_tgt_len, model.opt.max_gen_len}) {
        write_pod(out, static_cast<int32_t>(v));
    }
    write_pod(out, static_cast<int32_t>(model.vocab.size()));
    for (const auto& tok : model.vocab.tokens) {
        write_pod(out, static_cast<uint32_t>(tok.size()));
        out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
    }
    write_pod(out, static_cast<int32_t>(model.params.size()));
    for (const auto& p : model.params) {
        write_pod(out, static_cast<int32_t>(p.rows()));
        write_pod(out, static_cast<int32_t>(p.cols()));
        out.write(reinterpret_cast<const char*>(p.data()),
                  static_cast<std::streamsize>(sizeof(float) * p.size()));
    }
    write_pod(out, model.train_stats.final_loss);
    write_pod(out, model.train_stats.steps);
    write_pod(out, model.train_stats.examples_seen);
    if (!out) throw std::runtime_error("seq2seq save: write failed for '" + path + "'");
}

Seq2SeqHandlePtr TinyTransformerBackend::load(const std::string& path) const {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("seq2seq load: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (std::string(magic, 8) != "LSAPS2S1") {
        throw std::runtime_error("seq2seq load: '" + path + "' is not a model file");
    }
    auto model = std::make_shared<TinyModel>();
    model->opt = options_;
    model->opt.d_model = read_pod<int32_t>(in);
    model->opt.n_heads = read_pod<int32_t>(in);
    model->opt.enc_layers = read_pod<int32_t>(in);
    model->opt.dec_layers = read_pod<int32_t>(in);
    model->opt.ff_mult = read_pod<int32_t>(in);
    model->opt.max_src_len = read_pod<int32_t>(in);
    model->opt.max_tgt_len = read_pod<int32_t>(in);
    model->opt.max_gen_len = read_pod<int32_t>(in);
    const int32_t vocab_size = read_pod<int32_t>(in);
    model->vocab.tokens.reserve(static_cast<size_t>(vocab_size));
    for (int32_t i = 0; i < vocab_size; ++i) {
        const uint32_t len = read_pod<uint32_t>(in);
        std::string tok(len, '\0');
        in.read(tok.data(), static_cast<std::streamsize>(len));
        model->vocab.index[tok] = i;
        model->vocab.tokens.push_back(std::move(tok));
    }
    ShapeBuilder shapes;
    model->layout = build_layout(shapes, model->opt, vocab_size, model->dec_pos_rows());
    const int32_t n_params = read_pod<int32_t>(in);
    if (n_params != static_cast<int32_t>(shapes.shapes.size())) {
        throw std::runtime_error("seq2seq load: parameter count mismatch in '" + path + "'");
    }
    for (int32_t i = 0; i < n_params; ++i) {
        const int32_t rows = read_pod<int32_t>(in);
        const int32_t cols = read_pod<int32_t>(in);
        if (rows != shapes.shapes[static_cast<size_t>(i)].first ||
            cols != shapes.shapes[static_cast<size_t>(i)].second) {
            throw std::runtime_error("seq2seq load: parameter shape mismatch in '" + path + "'");
        }
        Mat p(rows, cols);
        in.read(reinterpret_cast<char*>(p.data()),
                static_cast<std::streamsize>(sizeof(float) * p.size()));
        model->params.push_back(std::move(p));
    }
    model->train_stats.final_loss = read_pod<double>(in);
    model->train_stats.steps = read_pod<int64_t>(in);
    model->train_stats.examples_seen = read_pod<int64_t>(in);
    if (!in) throw std::runtime_error("seq2seq load: truncated model file '" + path + "'");
    return model;
}

}  // namespace lsap
