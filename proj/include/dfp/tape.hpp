#ifndef DFP_TAPE_HPP
#define DFP_TAPE_HPP

#include <functional>
#include <vector>

#include "dfp/tensor.hpp"

namespace dfp {

class Tape;

// Handle to a node on a tape. Cheap to copy; only meaningful together with
// the tape that produced it.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode differentiation record. Built define-by-run: each operator
// appends one node holding its output value, input ids and a backward rule.
// Single-writer: one thread builds a tape and runs backward on it. Tensors
// already on the tape are never mutated by later ops.
class Tape {
  public:
    using BackwardFn = std::function<void(Tape&, int node_id)>;

    Var leaf(Tensor value, bool requires_grad = false);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    // Appends an operator record. All inputs must already live on this tape
    // (topological order by construction).
    Var record(const char* op, std::vector<int> inputs, Tensor output, BackwardFn backward);

    const Tensor& val(Var v) const { return nodes_[check(v.id)].value; }
    const Tensor& val(int id) const { return nodes_[check(id)].value; }
    const char* op_name(int id) const { return nodes_[check(id)].op; }
    const std::vector<int>& inputs(int id) const { return nodes_[check(id)].inputs; }

    // True if gradient must be propagated into this node.
    bool wants_grad(int id) const { return nodes_[check(id)].requires; }

    // Gradient accessors for backward rules: grad_accum allocates a zero
    // tensor on first touch, callers add into it.
    Tensor& grad_accum(int id);
    bool has_grad(int id) const { return nodes_[check(id)].has_grad; }
    const Tensor& grad(Var v) const;
    // Zeros if the node was never reached by backward.
    Tensor grad_or_zero(Var v) const;

    // Runs reverse accumulation from a scalar loss node. Visits each node
    // exactly once, in reverse topological order.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires = false;
        std::vector<int> inputs;
        const char* op = "leaf";
        BackwardFn back;
    };

    int check(int id) const;
    std::vector<Node> nodes_;
};

}  // namespace dfp

#endif
