#pragma once

// Audio front-end: PCM WAV I/O, Hamming framing, the 200-bin speech
// spectrogram, the 3-channel log-Mel cube, and a linear patch embedder
// turning a spectrogram into a FeatureSet.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avf/feature_set.hpp"
#include "avf/numeric.hpp"
#include "avf/rng.hpp"

namespace avf {

struct AudioClip {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 16000;
};

bool is_supported_sample_rate(int hz) noexcept;

/// Decodes RIFF/WAVE PCM (format 1), 16-bit, mono, little-endian. Samples
/// are scaled by 1/32768. Throws UnsupportedFormat or CorruptHeader.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const unsigned char> bytes);
/// Writes 16-bit PCM mono; samples are scaled by 32768, rounded and clamped.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);
std::vector<unsigned char> encode_wav(const AudioClip& clip);

constexpr double kWindowMs = 40.0;
constexpr double kHopMs = 10.0;
constexpr std::size_t kSpeechBins = 200;
constexpr std::size_t kDefaultMelBands = 40;
constexpr double kLogFloor = 1e-10;

/// Periodic Hamming window 0.54 - 0.46 cos(2 pi t / length).
std::vector<double> hamming_window(std::size_t length);

/// Number of frames floor((n - win) / hop) + 1; 0 when n < win.
std::size_t frame_count(std::size_t n, std::size_t win, std::size_t hop) noexcept;

/// Splits the clip into Hamming-windowed frames. Throws ClipTooShort when the
/// clip is shorter than one window and InvalidArgument for a zero hop.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip, double window_ms,
                                              double hop_ms);

/// frames x bins grid, row-major.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  double at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
};

/// Log-magnitude of the zero-padded FFT per 40 ms / 10 ms frame, cropped to
/// the lowest 200 bins.
Spectrogram speech_spectrogram(const AudioClip& clip);

/// Three bands x frames grids: static log-Mel, delta, delta-delta.
struct MelCube {
  std::size_t bands = 0;
  std::size_t frames = 0;
  std::vector<double> static_mel;
  std::vector<double> delta;
  std::vector<double> delta_delta;

  double at(std::size_t channel, std::size_t band, std::size_t frame) const;
};

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// Triangular HTK-Mel filterbank, bands x (fft_size/2 + 1), row-major.
/// Throws InvalidArgument when a filter ends up with no support.
Mat mel_filterbank(std::size_t bands, std::size_t fft_size, int sample_rate);

/// Regression deltas over a +/-2 frame window with edge replication.
/// `grid` is bands x frames row-major.
std::vector<double> compute_deltas(const std::vector<double>& grid, std::size_t bands,
                                   std::size_t frames);

MelCube log_mel_3d(const AudioClip& clip, std::size_t bands = kDefaultMelBands);

struct PatchEmbedParams {
  std::size_t grid_h = 1;
  std::size_t grid_w = 1;
  Mat projection;  // patch_pixels x channels
  Vec bias;        // channels

  static PatchEmbedParams zeros(std::size_t grid_h, std::size_t grid_w, std::size_t patch_pixels,
                                std::size_t channels);
  static PatchEmbedParams init(std::size_t grid_h, std::size_t grid_w, std::size_t patch_pixels,
                               std::size_t channels, Rng& rng);
  /// Params sized for a frames x bins input.
  static PatchEmbedParams for_input(std::size_t frames, std::size_t bins, std::size_t grid_h,
                                    std::size_t grid_w, std::size_t channels, Rng& rng);

  std::size_t channels() const noexcept { return projection.cols(); }
  std::size_t patch_pixels() const noexcept { return projection.rows(); }
  std::vector<TensorRef> tensors(const std::string& prefix);
};

/// Tile shape used for a frames x bins input: (frames / grid_h, bins / grid_w);
/// trailing rows and columns that do not fill a tile are dropped. Throws
/// GridTooFineForInput when a tile would be empty.
std::pair<std::size_t, std::size_t> patch_shape(std::size_t frames, std::size_t bins,
                                                std::size_t grid_h, std::size_t grid_w);

/// Tiles, flattens (row-major inside each tile) and projects every patch:
/// out_p = projection^T x_p + bias. Patches are ordered row-major over the grid.
FeatureSet patch_embed(const Spectrogram& spec, const PatchEmbedParams& params);

struct PatchEmbedGrads {
  PatchEmbedParams params;
};

class PatchEmbedLayer {
 public:
  explicit PatchEmbedLayer(PatchEmbedParams params) : params_(std::move(params)) {}

  FeatureSet forward(const Spectrogram& spec);
  /// One upstream gradient per output vector.
  PatchEmbedGrads backward(const std::vector<Vec>& upstream) const;

  PatchEmbedParams& params() noexcept { return params_; }
  const PatchEmbedParams& params() const noexcept { return params_; }

 private:
  PatchEmbedParams params_;
  std::optional<std::vector<Vec>> patches_;
};

}  // namespace avf
