#pragma once

// Checkpoint: "AVFCKPT1", then per tensor until end of file:
//   u16 name length | UTF-8 name | u32 rows | u32 cols | rows*cols float64
// All integers and floats little-endian, values row-major.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "avf/numeric.hpp"

namespace avf {

struct NamedTensor {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

std::vector<unsigned char> encode_checkpoint(const std::vector<TensorRef>& tensors);
/// Throws CorruptMagic or TruncatedFile.
std::vector<NamedTensor> decode_checkpoint(std::span<const unsigned char> bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<TensorRef>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

/// Copies loaded values into `targets` by name. Every target must be present
/// with a matching shape, and no extra tensors may remain (DimMismatch).
void restore_tensors(const std::vector<NamedTensor>& loaded, const std::vector<TensorRef>& targets);

}  // namespace avf
