#include "avf/feature_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "avf/error.hpp"

namespace avf {
namespace {

constexpr char kMagic[4] = {'A', 'V', 'F', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::span<const unsigned char> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_features(const FeatureSet& fs) {
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  out.reserve(12 + 4 * fs.size() * fs.dim());
  put_u32(out, static_cast<std::uint32_t>(fs.size()));
  put_u32(out, static_cast<std::uint32_t>(fs.dim()));
  for (const Vec& v : fs) {
    for (double x : v) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  return out;
}

FeatureSet decode_features(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorruptMagic("feature file does not start with AVF1");
  }
  if (bytes.size() < 12) throw TruncatedFile("feature header shorter than 12 bytes");
  const std::uint64_t n = get_u32(bytes, 4);
  const std::uint64_t d = get_u32(bytes, 8);
  if (n == 0 || d == 0 || n * d > kMaxFeatureEntries) {
    throw DimOverflow("declared n=" + std::to_string(n) + ", d=" + std::to_string(d));
  }
  const std::uint64_t payload = 4 * n * d;
  if (bytes.size() - 12 != payload) {
    throw TruncatedFile("payload is " + std::to_string(bytes.size() - 12) + " bytes, header declares " +
                        std::to_string(payload));
  }
  std::vector<Vec> vectors;
  vectors.reserve(n);
  std::size_t at = 12;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (auto& x : row) {
      x = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
      at += 4;
    }
    vectors.emplace_back(std::move(row));
  }
  return FeatureSet(std::move(vectors));
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void save_features(const std::filesystem::path& path, const FeatureSet& fs) {
  write_file_bytes(path, encode_features(fs));
}

FeatureSet load_features(const std::filesystem::path& path) {
  return decode_features(read_file_bytes(path));
}

}  // namespace avf
