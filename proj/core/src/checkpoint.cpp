#include "avf/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <map>

#include "avf/error.hpp"
#include "avf/feature_io.hpp"

namespace avf {
namespace {

constexpr char kMagic[8] = {'A', 'V', 'F', 'C', 'K', 'P', 'T', '1'};

void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> b) : b_(b) {}
  bool done() const { return pos_ == b_.size(); }
  std::size_t remaining() const { return b_.size() - pos_; }
  std::uint64_t le(int bytes, const char* what) {
    need(static_cast<std::size_t>(bytes), what);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string text(std::size_t len) {
    need(len, "tensor name");
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  void need(std::size_t len, const char* what) const {
    if (b_.size() - pos_ < len) throw TruncatedFile(std::string("checkpoint ends inside ") + what);
  }

 private:
  std::span<const unsigned char> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const std::vector<TensorRef>& tensors) {
  std::vector<unsigned char> out(kMagic, kMagic + 8);
  for (const TensorRef& t : tensors) {
    if (t.name.size() > 0xFFFF) throw InvalidArgument("tensor name too long: " + t.name);
    put_le(out, t.name.size(), 2);
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_le(out, t.rows, 4);
    put_le(out, t.cols, 4);
    for (double x : t.values) put_le(out, std::bit_cast<std::uint64_t>(x), 8);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw CorruptMagic("checkpoint does not start with AVFCKPT1");
  }
  Reader r(bytes.subspan(8));
  std::vector<NamedTensor> out;
  while (!r.done()) {
    NamedTensor t;
    const auto len = static_cast<std::size_t>(r.le(2, "name length"));
    t.name = r.text(len);
    t.rows = static_cast<std::size_t>(r.le(4, "rows"));
    t.cols = static_cast<std::size_t>(r.le(4, "cols"));
    const std::uint64_t count = static_cast<std::uint64_t>(t.rows) * t.cols;
    if (count > r.remaining() / 8) throw TruncatedFile("checkpoint ends inside tensor '" + t.name + "'");
    t.values.resize(count);
    for (double& x : t.values) x = std::bit_cast<double>(r.le(8, "tensor payload"));
    out.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<TensorRef>& tensors) {
  write_file_bytes(path, encode_checkpoint(tensors));
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

void restore_tensors(const std::vector<NamedTensor>& loaded, const std::vector<TensorRef>& targets) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : loaded) by_name[t.name] = &t;
  if (by_name.size() != targets.size() || loaded.size() != targets.size()) {
    throw DimMismatch("checkpoint holds " + std::to_string(loaded.size()) + " tensors, model has " +
                      std::to_string(targets.size()));
  }
  for (const TensorRef& t : targets) {
    const auto it = by_name.find(t.name);
    if (it == by_name.end()) throw DimMismatch("checkpoint lacks tensor '" + t.name + "'");
    const NamedTensor& src = *it->second;
    if (src.rows != t.rows || src.cols != t.cols) {
      throw DimMismatch("tensor '" + t.name + "' shape " + std::to_string(src.rows) + "x" +
                        std::to_string(src.cols) + ", model expects " + std::to_string(t.rows) +
                        "x" + std::to_string(t.cols));
    }
    std::copy(src.values.begin(), src.values.end(), t.values.begin());
  }
}

}  // namespace avf
