#include "avf/audio_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "avf/error.hpp"

namespace avf {
namespace {

std::size_t ms_to_samples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

std::size_t fft_size_for(std::size_t win) { return next_power_of_two(win); }

}  // namespace

std::vector<double> hamming_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t t = 0; t < length; ++t) {
    w[t] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                  static_cast<double>(length));
  }
  return w;
}

std::size_t frame_count(std::size_t n, std::size_t win, std::size_t hop) noexcept {
  if (n < win || hop == 0) return 0;
  return (n - win) / hop + 1;
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip, double window_ms,
                                              double hop_ms) {
  if (!is_supported_sample_rate(clip.sample_rate)) {
    throw UnsupportedFormat("sample rate " + std::to_string(clip.sample_rate));
  }
  const std::size_t win = ms_to_samples(window_ms, clip.sample_rate);
  const std::size_t hop = ms_to_samples(hop_ms, clip.sample_rate);
  if (win == 0 || hop == 0) throw InvalidArgument("window and hop must span at least one sample");
  if (clip.samples.size() < win) {
    throw ClipTooShort(std::to_string(clip.samples.size()) + " samples, window needs " +
                       std::to_string(win));
  }

  const std::vector<double> window = hamming_window(win);
  const std::size_t count = frame_count(clip.samples.size(), win, hop);
  std::vector<std::vector<double>> frames(count, std::vector<double>(win));
  for (std::size_t f = 0; f < count; ++f) {
    const double* src = clip.samples.data() + f * hop;
    for (std::size_t t = 0; t < win; ++t) frames[f][t] = src[t] * window[t];
  }
  return frames;
}

Spectrogram speech_spectrogram(const AudioClip& clip) {
  const auto frames = frame_signal(clip, kWindowMs, kHopMs);
  const std::size_t fft_size = fft_size_for(frames.front().size());
  if (fft_size / 2 + 1 < kSpeechBins) throw InvalidArgument("FFT too small for 200 bins");

  Spectrogram spec{frames.size(), kSpeechBins, std::vector<double>(frames.size() * kSpeechBins)};
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const ComplexVec x = fft_real(frames[f], fft_size);
    for (std::size_t k = 0; k < kSpeechBins; ++k) {
      const double mag = std::hypot(x.re[k], x.im[k]);
      spec.values[f * kSpeechBins + k] = std::log(std::max(mag, kLogFloor));
    }
  }
  return spec;
}

double MelCube::at(std::size_t channel, std::size_t band, std::size_t frame) const {
  const std::vector<double>* grids[] = {&static_mel, &delta, &delta_delta};
  return (*grids[channel])[band * frames + frame];
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Mat mel_filterbank(std::size_t bands, std::size_t fft_size, int sample_rate) {
  if (bands == 0) throw InvalidArgument("mel filterbank needs at least one band");
  const std::size_t bins = fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(bands + 1));
  }

  Mat fb(bands, bins);
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], centre = edges[b + 1], hi = edges[b + 2];
    double support = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
      const double hz = static_cast<double>(j) * sample_rate / static_cast<double>(fft_size);
      const double rising = (hz - lo) / (centre - lo);
      const double falling = (hi - hz) / (hi - centre);
      const double w = std::max(0.0, std::min(rising, falling));
      fb(b, j) = w;
      support += w;
    }
    if (support <= 0.0) {
      throw InvalidArgument("mel band " + std::to_string(b) + " covers no FFT bin; use fewer bands");
    }
  }
  return fb;
}

std::vector<double> compute_deltas(const std::vector<double>& grid, std::size_t bands,
                                   std::size_t frames) {
  constexpr int kWidth = 2;
  constexpr double kDenom = 2.0 * (1 * 1 + 2 * 2);
  std::vector<double> out(grid.size());
  const auto clamp_frame = [&](long t) {
    return static_cast<std::size_t>(std::clamp<long>(t, 0, static_cast<long>(frames) - 1));
  };
  for (std::size_t b = 0; b < bands; ++b) {
    const double* row = grid.data() + b * frames;
    for (std::size_t t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (int w = 1; w <= kWidth; ++w) {
        const long lt = static_cast<long>(t);
        acc += w * (row[clamp_frame(lt + w)] - row[clamp_frame(lt - w)]);
      }
      out[b * frames + t] = acc / kDenom;
    }
  }
  return out;
}

MelCube log_mel_3d(const AudioClip& clip, std::size_t bands) {
  if (bands < 10) throw InvalidArgument("log_mel_3d needs at least 10 bands");
  const auto frames = frame_signal(clip, kWindowMs, kHopMs);
  const std::size_t fft_size = fft_size_for(frames.front().size());
  const Mat fb = mel_filterbank(bands, fft_size, clip.sample_rate);
  const std::size_t bins = fb.cols();

  MelCube cube;
  cube.bands = bands;
  cube.frames = frames.size();
  cube.static_mel.assign(bands * frames.size(), 0.0);
  std::vector<double> power(bins);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const ComplexVec x = fft_real(frames[f], fft_size);
    for (std::size_t j = 0; j < bins; ++j) power[j] = x.re[j] * x.re[j] + x.im[j] * x.im[j];
    for (std::size_t b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t j = 0; j < bins; ++j) e += fb(b, j) * power[j];
      cube.static_mel[b * cube.frames + f] = std::log(std::max(e, kLogFloor));
    }
  }
  cube.delta = compute_deltas(cube.static_mel, bands, cube.frames);
  cube.delta_delta = compute_deltas(cube.delta, bands, cube.frames);
  return cube;
}

// ---- patch embedding ----

PatchEmbedParams PatchEmbedParams::zeros(std::size_t grid_h, std::size_t grid_w,
                                         std::size_t patch_pixels, std::size_t channels) {
  if (grid_h == 0 || grid_w == 0) throw InvalidArgument("patch grid must be at least 1x1");
  return {grid_h, grid_w, Mat(patch_pixels, channels), Vec(channels)};
}

PatchEmbedParams PatchEmbedParams::init(std::size_t grid_h, std::size_t grid_w,
                                        std::size_t patch_pixels, std::size_t channels, Rng& rng) {
  PatchEmbedParams p = zeros(grid_h, grid_w, patch_pixels, channels);
  const double bound = 1.0 / std::sqrt(static_cast<double>(patch_pixels));
  for (double& x : p.projection.values()) x = rng.uniform(-bound, bound);
  return p;
}

PatchEmbedParams PatchEmbedParams::for_input(std::size_t frames, std::size_t bins,
                                             std::size_t grid_h, std::size_t grid_w,
                                             std::size_t channels, Rng& rng) {
  const auto [ph, pw] = patch_shape(frames, bins, grid_h, grid_w);
  return init(grid_h, grid_w, ph * pw, channels, rng);
}

std::vector<TensorRef> PatchEmbedParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "projection", projection), tensor_ref(prefix + "bias", bias)};
}

std::pair<std::size_t, std::size_t> patch_shape(std::size_t frames, std::size_t bins,
                                                std::size_t grid_h, std::size_t grid_w) {
  if (grid_h == 0 || grid_w == 0) throw InvalidArgument("patch grid must be at least 1x1");
  if (frames < grid_h || bins < grid_w) {
    throw GridTooFineForInput("grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                              " on a " + std::to_string(frames) + "x" + std::to_string(bins) +
                              " input");
  }
  return {frames / grid_h, bins / grid_w};
}

namespace {

std::vector<Vec> extract_patches(const Spectrogram& spec, std::size_t grid_h, std::size_t grid_w) {
  const auto [ph, pw] = patch_shape(spec.frames, spec.bins, grid_h, grid_w);
  std::vector<Vec> patches;
  patches.reserve(grid_h * grid_w);
  for (std::size_t gr = 0; gr < grid_h; ++gr) {
    for (std::size_t gc = 0; gc < grid_w; ++gc) {
      Vec x(ph * pw);
      for (std::size_t r = 0; r < ph; ++r) {
        for (std::size_t c = 0; c < pw; ++c) x[r * pw + c] = spec.at(gr * ph + r, gc * pw + c);
      }
      patches.push_back(std::move(x));
    }
  }
  return patches;
}

FeatureSet project_patches(const std::vector<Vec>& patches, const PatchEmbedParams& params) {
  if (patches.front().dim() != params.patch_pixels()) {
    throw DimMismatch("patch has " + std::to_string(patches.front().dim()) +
                      " pixels, projection expects " + std::to_string(params.patch_pixels()));
  }
  if (params.bias.dim() != params.channels()) throw DimMismatch("patch bias dim");
  std::vector<Vec> out;
  out.reserve(patches.size());
  for (const Vec& x : patches) {
    Vec y = matvec_transposed(params.projection, x);
    axpy(1.0, params.bias.values(), y.values());
    out.push_back(std::move(y));
  }
  return FeatureSet(std::move(out));
}

}  // namespace

FeatureSet patch_embed(const Spectrogram& spec, const PatchEmbedParams& params) {
  return project_patches(extract_patches(spec, params.grid_h, params.grid_w), params);
}

FeatureSet PatchEmbedLayer::forward(const Spectrogram& spec) {
  patches_ = extract_patches(spec, params_.grid_h, params_.grid_w);
  return project_patches(*patches_, params_);
}

PatchEmbedGrads PatchEmbedLayer::backward(const std::vector<Vec>& upstream) const {
  if (!patches_) throw MissingForwardCache("PatchEmbedLayer::backward called before forward");
  if (upstream.size() != patches_->size()) throw DimMismatch("one upstream gradient per patch");
  PatchEmbedGrads g{PatchEmbedParams::zeros(params_.grid_h, params_.grid_w,
                                            params_.patch_pixels(), params_.channels())};
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    add_outer(g.params.projection, 1.0, (*patches_)[i], upstream[i]);
    axpy(1.0, upstream[i].values(), g.params.bias.values());
  }
  return g;
}

}  // namespace avf
