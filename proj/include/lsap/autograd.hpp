#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <vector>

namespace lsap::ag {

using Mat = Eigen::MatrixXf;

// Reverse-mode autodiff on float matrices. One tape per training example;
// nodes live in a deque so pointers stay stable. Parameter nodes reference
// external storage and push their gradients into an external sink, which lets
// several tapes accumulate into per-chunk buffers for deterministic
// multi-threaded batching.
struct Node {
    Mat val;                    // owned value (unused for parameter nodes)
    const Mat* ext_val = nullptr;
    Mat* grad_sink = nullptr;   // parameter gradient accumulator
    Mat grad;                   // local gradient (non-parameter nodes)
    bool requires_grad = false;
    std::function<void()> backward_fn;

    const Mat& value() const { return ext_val ? *ext_val : val; }
};

class Tape {
  public:
    Node* leaf(Mat v);
    // References external storage without copying; no gradient flows.
    Node* cref(const Mat& value);
    Node* param(const Mat& value, Mat& grad_sink);

    Node* matmul(Node* a, Node* b);
    Node* add(Node* a, Node* b);
    // Broadcasts a 1 x d row over every row of a.
    Node* add_row(Node* a, Node* row);
    Node* relu(Node* a);
    Node* layer_norm(Node* x, Node* gain, Node* bias, float eps = 1e-5f);
    // Gathers rows of a parameter table; backward scatter-adds into its sink.
    Node* embedding(Node* table, std::vector<int> ids);
    // Multi-head scaled dot-product attention over column head blocks.
    Node* attention(Node* q, Node* k, Node* v, int n_heads, bool causal);
    // Token-mean cross entropy; returns a 1 x 1 node.
    Node* cross_entropy(Node* logits, std::vector<int> targets);

    void backward(Node* loss);

    // Adds g into n's gradient (sink for parameters).
    static void accumulate(Node* n, const Mat& g);

  private:
    Node* make(Mat v, bool requires_grad);
    std::deque<Node> nodes_;
    std::vector<Node*> order_;
};

}  // namespace lsap::ag
