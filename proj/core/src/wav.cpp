#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "avf/audio_frontend.hpp"
#include "avf/error.hpp"

namespace avf {
namespace {

std::uint32_t read_u32(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const unsigned char> b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

bool is_supported_sample_rate(int hz) noexcept {
  return hz == 8000 || hz == 16000 || hz == 44100 || hz == 48000;
}

AudioClip decode_wav(std::span<const unsigned char> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw CorruptHeader("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  int sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t chunk_size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > b.size() - body) {
      throw CorruptHeader("chunk extends past end of file");
    }
    if (tag_is(b, pos, "fmt ")) {
      if (chunk_size < 16) throw CorruptHeader("fmt chunk too short");
      const std::uint16_t format = read_u16(b, body);
      const std::uint16_t channels = read_u16(b, body + 2);
      sample_rate = static_cast<int>(read_u32(b, body + 4));
      const std::uint16_t bits = read_u16(b, body + 14);
      if (format != 1) {
        throw UnsupportedFormat("format code " + std::to_string(format) + " (only PCM 1)");
      }
      if (channels != 1) {
        throw UnsupportedFormat(std::to_string(channels) + " channels (only mono)");
      }
      if (bits != 16) throw UnsupportedFormat(std::to_string(bits) + "-bit samples (only 16)");
      if (!is_supported_sample_rate(sample_rate)) {
        throw UnsupportedFormat("sample rate " + std::to_string(sample_rate));
      }
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      if (!have_fmt) throw CorruptHeader("data chunk before fmt chunk");
      if (chunk_size % 2 != 0) throw CorruptHeader("odd data chunk size for 16-bit PCM");
      AudioClip clip;
      clip.sample_rate = sample_rate;
      clip.samples.resize(chunk_size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
        clip.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return clip;
    }
    pos = body + chunk_size + (chunk_size & 1U);
  }
  throw CorruptHeader(have_fmt ? "no data chunk" : "no fmt chunk");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<unsigned char> encode_wav(const AudioClip& clip) {
  if (!is_supported_sample_rate(clip.sample_rate)) {
    throw UnsupportedFormat("sample rate " + std::to_string(clip.sample_rate));
  }
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const std::vector<unsigned char> bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace avf
