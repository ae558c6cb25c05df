#ifndef DFP_PARAMS_HPP
#define DFP_PARAMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dfp/tape.hpp"

namespace dfp {

// Named model parameters in registration order. A training step binds every
// entry onto a fresh tape as a gradient-carrying leaf; registration order is
// the canonical order for optimizer state and serialization.
class ParamStore {
  public:
    struct Entry {
        std::string name;
        Tensor value;
        bool trainable = true;
    };

    int add(std::string name, Tensor value, bool trainable = true);

    size_t count() const { return entries_.size(); }
    Entry& entry(int idx) { return entries_[static_cast<size_t>(idx)]; }
    const Entry& entry(int idx) const { return entries_[static_cast<size_t>(idx)]; }
    const std::vector<Entry>& entries() const { return entries_; }
    int find(const std::string& name) const;  // -1 if absent

    std::int64_t trainable_scalar_count() const;

    // Leaf every parameter onto the tape; result indexed like entries().
    std::vector<Var> bind(Tape& t, bool with_grad = true) const;

  private:
    std::vector<Entry> entries_;
};

}  // namespace dfp

#endif
