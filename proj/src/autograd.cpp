#include "lsap/autograd.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace lsap::ag {

Node* Tape::make(Mat v, bool requires_grad) {
    nodes_.emplace_back();
    Node* n = &nodes_.back();
    n->val = std::move(v);
    n->requires_grad = requires_grad;
    order_.push_back(n);
    return n;
}

Node* Tape::leaf(Mat v) { return make(std::move(v), false); }

Node* Tape::cref(const Mat& value) {
    nodes_.emplace_back();
    Node* n = &nodes_.back();
    n->ext_val = &value;
    n->requires_grad = false;
    order_.push_back(n);
    return n;
}

Node* Tape::param(const Mat& value, Mat& grad_sink) {
    nodes_.emplace_back();
    Node* n = &nodes_.back();
    n->ext_val = &value;
    n->grad_sink = &grad_sink;
    n->requires_grad = true;
    order_.push_back(n);
    return n;
}

void Tape::accumulate(Node* n, const Mat& g) {
    if (!n->requires_grad) return;
    if (n->grad_sink) {
        *n->grad_sink += g;
    } else if (n->grad.size() == 0) {
        n->grad = g;
    } else {
        n->grad += g;
    }
}

Node* Tape::matmul(Node* a, Node* b) {
    Node* out = make(a->value() * b->value(), a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [a, b, out]() {
            if (a->requires_grad) accumulate(a, out->grad * b->value().transpose());
            if (b->requires_grad) accumulate(b, a->value().transpose() * out->grad);
        };
    }
    return out;
}

Node* Tape::add(Node* a, Node* b) {
    Node* out = make(a->value() + b->value(), a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [a, b, out]() {
            if (a->requires_grad) accumulate(a, out->grad);
            if (b->requires_grad) accumulate(b, out->grad);
        };
    }
    return out;
}

Node* Tape::add_row(Node* a, Node* row) {
    Mat v = a->value();
    v.rowwise() += Eigen::RowVectorXf(row->value().row(0));
    Node* out = make(std::move(v), a->requires_grad || row->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [a, row, out]() {
            if (a->requires_grad) accumulate(a, out->grad);
            if (row->requires_grad) accumulate(row, out->grad.colwise().sum());
        };
    }
    return out;
}

Node* Tape::relu(Node* a) {
    Node* out = make(a->value().cwiseMax(0.0f), a->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [a, out]() {
            Mat g = out->grad;
            const Mat& x = a->value();
            for (Eigen::Index j = 0; j < g.cols(); ++j) {
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    if (x(i, j) <= 0.0f) g(i, j) = 0.0f;
                }
            }
            accumulate(a, g);
        };
    }
    return out;
}

Node* Tape::layer_norm(Node* x, Node* gain, Node* bias, float eps) {
    const Mat& v = x->value();
    const Eigen::Index rows = v.rows(), cols = v.cols();
    Mat xhat(rows, cols);
    Eigen::VectorXf inv_sigma(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const float mu = v.row(i).mean();
        const float var = (v.row(i).array() - mu).square().mean();
        const float is = 1.0f / std::sqrt(var + eps);
        inv_sigma(i) = is;
        xhat.row(i) = (v.row(i).array() - mu) * is;
    }
    Mat y = xhat;
    const Eigen::RowVectorXf g_row = gain->value().row(0);
    const Eigen::RowVectorXf b_row = bias->value().row(0);
    for (Eigen::Index i = 0; i < rows; ++i) {
        y.row(i) = xhat.row(i).cwiseProduct(g_row) + b_row;
    }
    Node* out = make(std::move(y), x->requires_grad || gain->requires_grad || bias->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [x, gain, bias, out, xhat = std::move(xhat),
                            inv_sigma = std::move(inv_sigma), g_row]() {
            const Mat& dy = out->grad;
            if (bias->requires_grad) accumulate(bias, dy.colwise().sum());
            if (gain->requires_grad) accumulate(gain, dy.cwiseProduct(xhat).colwise().sum());
            if (x->requires_grad) {
                Mat dx(dy.rows(), dy.cols());
                for (Eigen::Index i = 0; i < dy.rows(); ++i) {
                    const Eigen::RowVectorXf dxhat = dy.row(i).cwiseProduct(g_row);
                    const float m1 = dxhat.mean();
                    const float m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
                    dx.row(i) =
                        (dxhat.array() - m1 - xhat.row(i).array() * m2) * inv_sigma(i);
                }
                accumulate(x, dx);
            }
        };
    }
    return out;
}

Node* Tape::embedding(Node* table, std::vector<int> ids) {
    const Mat& tab = table->value();
    Mat v(static_cast<Eigen::Index>(ids.size()), tab.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= tab.rows()) {
            throw std::out_of_range("embedding: token id out of range");
        }
        v.row(static_cast<Eigen::Index>(i)) = tab.row(ids[i]);
    }
    Node* out = make(std::move(v), table->requires_grad);
    if (out->requires_grad) {
        if (!table->grad_sink) {
            throw std::logic_error("embedding: table must be a parameter node");
        }
        out->backward_fn = [table, out, ids = std::move(ids)]() {
            Mat& sink = *table->grad_sink;
            for (size_t i = 0; i < ids.size(); ++i) {
                sink.row(ids[i]) += out->grad.row(static_cast<Eigen::Index>(i));
            }
        };
    }
    return out;
}

Node* Tape::attention(Node* q, Node* k, Node* v, int n_heads, bool causal) {
    const Mat& qv = q->value();
    const Mat& kv = k->value();
    const Mat& vv = v->value();
    const Eigen::Index d = qv.cols();
    if (d % n_heads != 0) throw std::invalid_argument("attention: d_model not divisible by heads");
    const Eigen::Index dh = d / n_heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    const Eigen::Index n = qv.rows(), m = kv.rows();

    auto weights = std::make_shared<std::vector<Mat>>();  // per-head softmax rows
    weights->reserve(n_heads);
    Mat out_v(n, d);
    for (int h = 0; h < n_heads; ++h) {
        const Eigen::Index c0 = h * dh;
        Mat scores = qv.middleCols(c0, dh) * kv.middleCols(c0, dh).transpose() * scale;
        if (causal) {
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = i + 1; j < m; ++j) scores(i, j) = -1e9f;
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const float mx = scores.row(i).maxCoeff();
            Eigen::ArrayXf e = (scores.row(i).array() - mx).exp();
            scores.row(i) = e / e.sum();
        }
        out_v.middleCols(c0, dh) = scores * vv.middleCols(c0, dh);
        weights->push_back(std::move(scores));
    }

    Node* out = make(std::move(out_v),
                     q->requires_grad || k->requires_grad || v->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [q, k, v, out, weights, n_heads, dh, scale]() {
            const Mat& qv = q->value();
            const Mat& kv = k->value();
            const Mat& vv = v->value();
            Mat dq = Mat::Zero(qv.rows(), qv.cols());
            Mat dk = Mat::Zero(kv.rows(), kv.cols());
            Mat dv = Mat::Zero(vv.rows(), vv.cols());
            for (int h = 0; h < n_heads; ++h) {
                const Eigen::Index c0 = h * dh;
                const Mat& attn = (*weights)[h];
                const Mat dout_h = out->grad.middleCols(c0, dh);
                dv.middleCols(c0, dh) = attn.transpose() * dout_h;
                Mat dattn = dout_h * vv.middleCols(c0, dh).transpose();
                // Softmax backward, row-wise.
                Mat ds(attn.rows(), attn.cols());
                for (Eigen::Index i = 0; i < attn.rows(); ++i) {
                    const float dot = dattn.row(i).dot(attn.row(i));
                    ds.row(i) = (attn.row(i).array() * (dattn.row(i).array() - dot)).matrix();
                }
                dq.middleCols(c0, dh) = ds * kv.middleCols(c0, dh) * scale;
                dk.middleCols(c0, dh) = ds.transpose() * qv.middleCols(c0, dh) * scale;
            }
            if (q->requires_grad) accumulate(q, dq);
            if (k->requires_grad) accumulate(k, dk);
            if (v->requires_grad) accumulate(v, dv);
        };
    }
    return out;
}

Node* Tape::cross_entropy(Node* logits, std::vector<int> targets) {
    const Mat& z = logits->value();
    if (static_cast<size_t>(z.rows()) != targets.size()) {
        throw std::invalid_argument("cross_entropy: row/target count mismatch");
    }
    const Eigen::Index n = z.rows();
    auto probs = std::make_shared<Mat>(z.rows(), z.cols());
    float loss = 0.0f;
    for (Eigen::Index i = 0; i < n; ++i) {
        const float mx = z.row(i).maxCoeff();
        Eigen::ArrayXf e = (z.row(i).array() - mx).exp();
        const float sum = e.sum();
        probs->row(i) = e / sum;
        loss += std::log(sum) + mx - z(i, targets[static_cast<size_t>(i)]);
    }
    loss /= static_cast<float>(n);
    Mat lv(1, 1);
    lv(0, 0) = loss;
    Node* out = make(std::move(lv), logits->requires_grad);
    if (out->requires_grad) {
        out->backward_fn = [logits, out, probs, targets = std::move(targets)]() {
            const float upstream = out->grad(0, 0) / static_cast<float>(targets.size());
            Mat dz = *probs;
            for (Eigen::Index i = 0; i < dz.rows(); ++i) {
                dz(i, targets[static_cast<size_t>(i)]) -= 1.0f;
            }
            accumulate(logits, dz * upstream);
        };
    }
    return out;
}

void Tape::backward(Node* loss) {
    if (loss->value().size() != 1) {
        throw std::invalid_argument("backward: loss must be a 1x1 node");
    }
    loss->grad = Mat::Ones(1, 1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        Node* n = *it;
        if (!n->requires_grad || !n->backward_fn) continue;
        if (n->grad.size() == 0) continue;  // not on the path to the loss
        n->backward_fn();
    }
}

}  // namespace lsap::ag
