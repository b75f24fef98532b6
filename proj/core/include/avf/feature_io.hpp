#pragma once

// Feature file: "AVF1" | u32 n | u32 d | n*d float32, all little-endian,
// row-major (one row per vector). Values are stored in 32-bit precision; the
// 64 -> 32 bit conversion on save is the only lossy step.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "avf/feature_set.hpp"

namespace avf {

constexpr std::uint64_t kMaxFeatureEntries = std::uint64_t{1} << 28;

std::vector<unsigned char> encode_features(const FeatureSet& fs);
/// Throws CorruptMagic, TruncatedFile (payload length differs from 4*n*d)
/// or DimOverflow (n or d zero, or n*d above kMaxFeatureEntries).
FeatureSet decode_features(std::span<const unsigned char> bytes);

void save_features(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet load_features(const std::filesystem::path& path);

/// Shared little-endian helpers for the binary formats.
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace avf
