#include "dfp/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dfp {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'P', 'W'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("weight file truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ofstream& f, float v) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 4);
    write_u32(f, bits);
}

float read_f32(std::ifstream& f) {
    std::uint32_t bits = read_u32(f);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& tensors) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(kMagic, 4);
    write_u32(f, kVersion);
    write_u32(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        write_u32(f, static_cast<std::uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(f, static_cast<std::uint32_t>(t.rank()));
        for (int e : t.shape) write_u32(f, static_cast<std::uint32_t>(e));
        for (double x : t.v) write_f32(f, static_cast<float>(x));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a weight container: " + path);
    std::uint32_t version = read_u32(f);
    if (version != kVersion)
        throw std::runtime_error("unsupported weight container version " +
                                 std::to_string(version));
    std::uint32_t count = read_u32(f);
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t name_len = read_u32(f);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        std::uint32_t rank = read_u32(f);
        Shape shape(rank);
        for (auto& e : shape) e = static_cast<int>(read_u32(f));
        Tensor t(shape);
        for (auto& x : t.v) x = static_cast<double>(read_f32(f));
        if (!f) throw std::runtime_error("weight file truncated: " + path);
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

void save_weights(const std::string& path, const FramePredictor& model) {
    std::vector<std::pair<std::string, Tensor>> tensors;
    tensors.emplace_back("meta.direction",
                         Tensor::scalar(model.direction == Direction::bi ? 1.0 : 0.0));
    for (const auto& e : model.params.entries()) tensors.emplace_back(e.name, e.value);
    save_tensors(path, tensors);
}

void load_weights(const std::string& path, FramePredictor& model) {
    auto tensors = load_tensors(path);
    bool saw_direction = false;
    size_t loaded = 0;
    for (auto& [name, t] : tensors) {
        if (name == "meta.direction") {
            Direction dir = t.v.at(0) != 0.0 ? Direction::bi : Direction::uni;
            if (dir != model.direction)
                throw std::runtime_error("weight file direction '" +
                                         std::string(direction_name(dir)) +
                                         "' does not match model direction '" +
                                         direction_name(model.direction) + "'");
            saw_direction = true;
            continue;
        }
        int idx = model.params.find(name);
        if (idx < 0) throw std::runtime_error("unknown tensor in weight file: " + name);
        auto& entry = model.params.entry(idx);
        if (entry.value.shape != t.shape)
            throw std::runtime_error("shape mismatch for " + name + ": file " +
                                     shape_str(t.shape) + " vs model " +
                                     shape_str(entry.value.shape));
        entry.value = std::move(t);
        ++loaded;
    }
    if (!saw_direction) throw std::runtime_error("weight file lacks direction tag: " + path);
    if (loaded != model.params.count())
        throw std::runtime_error("weight file holds " + std::to_string(loaded) + " of " +
                                 std::to_string(model.params.count()) + " model tensors");
    // keep the frozen extractor views in sync with the store
    for (size_t l = 0; l < model.ctx.weights.size(); ++l) {
        model.ctx.weights[l] =
            model.params.entry(model.params.find("ctx.conv" + std::to_string(l) + ".w")).value;
        model.ctx.biases[l] =
            model.params.entry(model.params.find("ctx.conv" + std::to_string(l) + ".b")).value;
    }
}

Direction peek_direction(const std::string& path) {
    for (auto& [name, t] : load_tensors(path))
        if (name == "meta.direction") return t.v.at(0) != 0.0 ? Direction::bi : Direction::uni;
    throw std::runtime_error("weight file lacks direction tag: " + path);
}

std::uint64_t file_fingerprint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (f) {
        f.read(buf, sizeof(buf));
        std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string fingerprint_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace dfp
