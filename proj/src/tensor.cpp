#include "dfp/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace dfp {

std::int64_t numel_of(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one extent");
    std::int64_t n = 1;
    for (int e : shape) {
        if (e < 1) throw std::invalid_argument("tensor extents must be >= 1, got " + shape_str(shape));
        n *= e;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

Tensor::Tensor(Shape s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel_of(shape)), 0.0);
}

Tensor::Tensor(Shape s, std::vector<double> data) : shape(std::move(s)), v(std::move(data)) {
    if (numel_of(shape) != static_cast<std::int64_t>(v.size()))
        throw std::invalid_argument("tensor data length " + std::to_string(v.size()) +
                                    " does not match shape " + shape_str(shape));
}

Tensor Tensor::full(Shape s, double value) {
    Tensor t(std::move(s));
    for (auto& x : t.v) x = value;
    return t;
}

Tensor Tensor::scalar(double value) {
    Tensor t(Shape{1});
    t.v[0] = value;
    return t;
}

Tensor random_tensor(Shape s, Rng& rng, double lo, double hi) {
    Tensor t(std::move(s));
    for (auto& x : t.v) x = rng.uniform(lo, hi);
    return t;
}

}  // namespace dfp
