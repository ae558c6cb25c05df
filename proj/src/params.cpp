#include "dfp/params.hpp"

#include <stdexcept>

namespace dfp {

int ParamStore::add(std::string name, Tensor value, bool trainable) {
    if (find(name) >= 0) throw std::logic_error("ParamStore: duplicate name " + name);
    entries_.push_back(Entry{std::move(name), std::move(value), trainable});
    return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::int64_t ParamStore::trainable_scalar_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries_)
        if (e.trainable) n += e.value.numel();
    return n;
}

std::vector<Var> ParamStore::bind(Tape& t, bool with_grad) const {
    std::vector<Var> vars;
    vars.reserve(entries_.size());
    for (const auto& e : entries_) vars.push_back(t.leaf(e.value, with_grad && e.trainable));
    return vars;
}

}  // namespace dfp
