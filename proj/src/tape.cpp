#include "dfp/tape.hpp"

#include <stdexcept>
#include <string>

namespace dfp {

int Tape::check(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw std::logic_error("tape: invalid node id " + std::to_string(id));
    return id;
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(const char* op, std::vector<int> inputs, Tensor output, BackwardFn backward) {
    Node n;
    n.op = op;
    n.value = std::move(output);
    for (int in : inputs) {
        check(in);
        n.requires = n.requires || nodes_[in].requires;
    }
    n.inputs = std::move(inputs);
    n.back = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_accum(int id) {
    Node& n = nodes_[check(id)];
    if (!n.has_grad) {
        n.grad = Tensor::zeros(n.value.shape);
        n.has_grad = true;
    }
    return n.grad;
}

const Tensor& Tape::grad(Var v) const {
    const Node& n = nodes_[check(v.id)];
    if (!n.has_grad) throw std::logic_error("tape: node has no gradient (run backward first)");
    return n.grad;
}

Tensor Tape::grad_or_zero(Var v) const {
    const Node& n = nodes_[check(v.id)];
    if (n.has_grad) return n.grad;
    return Tensor::zeros(n.value.shape);
}

void Tape::backward(Var loss) {
    const Node& ln = nodes_[check(loss.id)];
    if (ln.value.numel() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(ln.value.shape));
    grad_accum(loss.id).v[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.has_grad || !n.requires || !n.back) continue;
        n.back(*this, id);
    }
}

}  // namespace dfp
