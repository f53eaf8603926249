#pragma once

#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ntmlab/params.hpp"
#include "ntmlab/tensor.hpp"

namespace ntmlab {

// Handle to a node on the active tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. Records one node per operation; nodes are
// appended in execution order, so every node's inputs precede it. The tape is
// rebuilt for each forward pass; backward() may run once per build.
class Tape {
public:
    Tape();

    // Leaves.
    Var constant(Tensor v);
    Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }
    // Registers a parameter leaf. Watching the same parameter again on this
    // tape returns the existing node, so gradients accumulate through it.
    Var watch(Parameter& p);

    const Tensor& val(Var v) const;
    const Tensor& grad_of(Var v) const;

    // Elementwise suite.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scalar_mul(Var x, double c);
    Var mul_by_scalar(Var x, Var s); // s is a 1-element node
    Var div_by_scalar(Var x, Var s);
    Var sigmoid(Var x);
    Var tanh_op(Var x);
    Var relu(Var x);
    Var softplus(Var x);
    Var clamp_min(Var x, double floor);
    Var pow_positive(Var x, Var gamma); // x > 0 elementwise, gamma a 1-element node

    // Structural ops (1-D).
    Var concat(const std::vector<Var>& parts);
    Var slice(Var x, int start, int len);
    Var sum(Var x);

    // Linear algebra.
    Var matmul(Var a, Var b);  // [m x k] * [k x n]
    Var matvec(Var w, Var x);  // [m x n] * [n] -> [m]
    Var vecmat(Var w, Var m);  // [n] * [n x m] -> [m]
    Var outer(Var u, Var v);   // [n] x [m] -> [n x m]

    // Attention primitives.
    Var softmax(Var x);                  // 1-D, max-subtracted
    Var cosine_rows(Var mem, Var key);   // [N x M], [M] -> [N]
    Var cosine_similarity(Var u, Var v); // [M], [M] -> scalar
    Var circular_convolve(Var w, Var s); // [N], [K] -> [N], K odd, K <= N

    // Masked binary cross entropy against constant targets. Sum reduction.
    Var bce_loss(Var pred, const Tensor& target, const Tensor& mask);

    // Reverse sweep from a scalar loss. Populates grad buffers for every node
    // up to the loss and accumulates into watched parameters' grad fields.
    void backward(Var loss);

    void reset();
    size_t size() const { return nodes_.size(); }
    bool backward_done() const { return backward_done_; }

    static constexpr double kBceClamp = 1e-7;
    static constexpr double kCosineDelta = 1e-8;

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, int)> back; // empty for leaves
    };

    std::vector<Node> nodes_;
    std::vector<std::pair<Parameter*, int>> watched_;
    std::unordered_map<const Parameter*, int> watch_index_;
    bool backward_done_ = false;

    Var record(Tensor value, std::function<void(Tape&, int)> back);
    Tensor& gbuf(int id) { return nodes_[static_cast<size_t>(id)].grad; }
    const Tensor& v(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    void require(bool cond, const std::string& msg) const;
};

} // namespace ntmlab
