#ifndef DFP_TENSOR_HPP
#define DFP_TENSOR_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dfp {

using Shape = std::vector<int>;

std::int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense array of doubles. Dimension order for 4-D data is
// batch x channel x height x width; lower ranks drop leading axes.
struct Tensor {
    Shape shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(Shape s);
    Tensor(Shape s, std::vector<double> data);

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
    static Tensor full(Shape s, double value);
    static Tensor scalar(double value);

    std::int64_t numel() const { return static_cast<std::int64_t>(v.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    // 4-D accessors, (b, c, y, x)
    double& at(int b, int c, int y, int x) {
        return v[((static_cast<size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    double at(int b, int c, int y, int x) const {
        return v[((static_cast<size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    // 3-D accessors, (c, y, x)
    double& at3(int c, int y, int x) {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    double at3(int c, int y, int x) const {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
};

// Deterministic RNG used everywhere a seed appears in a public interface.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }
    std::uint64_t next() { return gen_(); }
    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace dfp

#endif
