#ifndef DFP_SERIALIZE_HPP
#define DFP_SERIALIZE_HPP

#include <string>
#include <utility>
#include <vector>

#include "dfp/model.hpp"

namespace dfp {

// Named-tensor container, little-endian:
//   magic "DFPW", u32 version (1), u32 tensor count, then per tensor:
//   u32 name length, name bytes, u32 rank, u32 extents[rank], f32 data.
// Scalars are stored as 32-bit floats regardless of in-memory precision;
// save(load(file)) reproduces the file byte for byte.
void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& tensors);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

// Model weights travel with a "meta.direction" tag tensor so uni- and
// bi-directional weight sets cannot be confused.
void save_weights(const std::string& path, const FramePredictor& model);
// Loads by name into an existing model; throws on direction or shape
// mismatch or missing tensors.
void load_weights(const std::string& path, FramePredictor& model);
Direction peek_direction(const std::string& path);

// FNV-1a 64-bit fingerprint of a file's bytes (weight hash for manifests).
std::uint64_t file_fingerprint(const std::string& path);
std::string fingerprint_hex(std::uint64_t h);

}  // namespace dfp

#endif
