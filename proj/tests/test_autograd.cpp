#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "lsap/autograd.hpp"
#include "lsap/rng_util.hpp"

using namespace lsap;
using ag::Mat;

namespace {

// Finite differences are the independent oracle for every backward rule: the
// analytic gradient from one tape must match (f(p+h) - f(p-h)) / 2h.

struct TinyNet {
    std::vector<Mat> params;
    std::vector<Mat> grads;

    int add(int rows, int cols, Rng& rng) {
        Mat m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) m(r, c) = rand_normal(rng, 0.0f, 0.5f);
        }
        params.push_back(m);
        grads.push_back(Mat::Zero(rows, cols));
        return static_cast<int>(params.size()) - 1;
    }
    void zero() {
        for (auto& g : grads) g.setZero();
    }
};

}  // namespace

TEST_CASE("analytic gradients match finite differences across all ops") {
    Rng rng(12345);
    TinyNet net;
    const int d = 8, ff = 16, vocab = 7, heads = 2;
    const int emb = net.add(vocab, d, rng);
    const int pos = net.add(5, d, rng);
    const int wq = net.add(d, d, rng);
    const int wk = net.add(d, d, rng);
    const int wv = net.add(d, d, rng);
    const int wo = net.add(d, d, rng);
    const int ln_g = net.add(1, d, rng);
    const int ln_b = net.add(1, d, rng);
    const int w1 = net.add(d, ff, rng);
    const int b1 = net.add(1, ff, rng);
    const int w2 = net.add(ff, d, rng);
    const int b2 = net.add(1, d, rng);
    const int ln2_g = net.add(1, d, rng);
    const int ln2_b = net.add(1, d, rng);
    const int out_w = net.add(d, vocab, rng);
    const int out_b = net.add(1, vocab, rng);

    const std::vector<int> src = {1, 2, 3};
    const std::vector<int> dec_in = {1, 4};
    const std::vector<int> dec_out = {4, 2};

    // Weights are deliberately reused across encoder, decoder self-attention,
    // and cross-attention so gradient accumulation over shared parameters is
    // exercised too.
    auto forward = [&](bool with_grad) -> float {
        ag::Tape tape;
        std::vector<ag::Node*> p(net.params.size());
        for (size_t i = 0; i < net.params.size(); ++i) {
            p[i] = with_grad ? tape.param(net.params[i], net.grads[i])
                             : tape.cref(net.params[i]);
        }
        auto positions = [&](size_t n) {
            std::vector<int> ids(n);
            for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
            return ids;
        };
        // Encoder side.
        ag::Node* x = tape.add(tape.embedding(p[emb], src),
                               tape.embedding(p[pos], positions(src.size())));
        ag::Node* h = tape.layer_norm(x, p[ln_g], p[ln_b]);
        ag::Node* a = tape.attention(tape.matmul(h, p[wq]), tape.matmul(h, p[wk]),
                                     tape.matmul(h, p[wv]), heads, /*causal=*/false);
        x = tape.add(x, tape.matmul(a, p[wo]));
        ag::Node* f1 = tape.relu(tape.add_row(tape.matmul(x, p[w1]), p[b1]));
        x = tape.add(x, tape.add_row(tape.matmul(f1, p[w2]), p[b2]));
        ag::Node* enc = tape.layer_norm(x, p[ln2_g], p[ln2_b]);

        // Decoder side: causal self-attention then cross-attention.
        ag::Node* y = tape.add(tape.embedding(p[emb], dec_in),
                               tape.embedding(p[pos], positions(dec_in.size())));
        ag::Node* hy = tape.layer_norm(y, p[ln_g], p[ln_b]);
        ag::Node* sa = tape.attention(tape.matmul(hy, p[wq]), tape.matmul(hy, p[wk]),
                                      tape.matmul(hy, p[wv]), heads, /*causal=*/true);
        y = tape.add(y, tape.matmul(sa, p[wo]));
        ag::Node* ca = tape.attention(tape.matmul(y, p[wq]), tape.matmul(enc, p[wk]),
                                      tape.matmul(enc, p[wv]), heads, /*causal=*/false);
        y = tape.add(y, tape.matmul(ca, p[wo]));
        ag::Node* logits = tape.add_row(tape.matmul(y, p[out_w]), p[out_b]);
        ag::Node* loss = tape.cross_entropy(logits, dec_out);
        const float value = loss->value()(0, 0);
        if (with_grad) tape.backward(loss);
        return value;
    };

    net.zero();
    forward(/*with_grad=*/true);

    Rng pick(999);
    const float h = 1e-2f;
    int checked = 0;
    for (size_t pi = 0; pi < net.params.size(); ++pi) {
        Mat& mat = net.params[pi];
        const int samples = std::min<int>(6, static_cast<int>(mat.size()));
        for (int s = 0; s < samples; ++s) {
            const int r = static_cast<int>(rand_below(pick, mat.rows()));
            const int c = static_cast<int>(rand_below(pick, mat.cols()));
            const float keep = mat(r, c);
            mat(r, c) = keep + h;
            const float up = forward(false);
            mat(r, c) = keep - h;
            const float down = forward(false);
            mat(r, c) = keep;
            const float numeric = (up - down) / (2.0f * h);
            const float analytic = net.grads[pi](r, c);
            CAPTURE(pi);
            CAPTURE(r);
            CAPTURE(c);
            CHECK(std::fabs(analytic - numeric) <=
                  2e-2f * std::max(1.0f, std::fabs(numeric)));
            ++checked;
        }
    }
    CHECK(checked >= 90);
}

TEST_CASE("cross entropy value matches a direct computation") {
    ag::Tape tape;
    Mat logits(1, 3);
    logits << 1.0f, 2.0f, 0.5f;
    ag::Node* l = tape.leaf(logits);
    ag::Node* loss = tape.cross_entropy(l, {1});
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(0.5);
    CHECK(loss->value()(0, 0) == doctest::Approx(std::log(z) - 2.0).epsilon(1e-4));
}

TEST_CASE("causal attention ignores future positions") {
    ag::Tape tape;
    Rng rng(4);
    Mat q(3, 4), k(3, 4), v(3, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
            q(i, j) = rand_normal(rng);
            k(i, j) = rand_normal(rng);
            v(i, j) = rand_normal(rng);
        }
    }
    ag::Node* full = tape.attention(tape.leaf(q), tape.leaf(k), tape.leaf(v), 2, true);
    // Changing the last key/value row must not affect the first output row.
    Mat k2 = k, v2 = v;
    k2.row(2).setConstant(9.0f);
    v2.row(2).setConstant(-9.0f);
    ag::Node* poked = tape.attention(tape.leaf(q), tape.leaf(k2), tape.leaf(v2), 2, true);
    CHECK((full->value().row(0) - poked->value().row(0)).norm() == doctest::Approx(0.0));
    CHECK((full->value().row(1) - poked->value().row(1)).norm() == doctest::Approx(0.0));
}
