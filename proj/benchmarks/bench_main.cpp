#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "avf/audio_frontend.hpp"
#include "avf/classifier.hpp"
#include "avf/cross_fusion.hpp"
#include "avf/intra_fusion.hpp"
#include "avf/numeric.hpp"

using namespace avf;

namespace {

Vec gaussian(std::size_t d, Rng& rng) {
  Vec v(d);
  for (double& x : v) x = rng.normal();
  return v;
}

FeatureSet frames(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gaussian(d, rng));
  return FeatureSet(std::move(out));
}

AudioClip one_second_tone() {
  AudioClip c;
  for (int t = 0; t < 16000; ++t) c.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * t / 16000.0));
  return c;
}

}  // namespace

static void BM_FbpForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const FBPParams p = FBPParams::init(dim, dim, 4, 64, 0.0, rng);
  const Vec a = gaussian(dim, rng), v = gaussian(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fbp_fuse(a, v, p, Mode::kEval, rng));
}
BENCHMARK(BM_FbpForward)->Arg(16)->Arg(128)->Arg(512);

static void BM_FbpForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  FbpLayer layer(FBPParams::init(dim, dim, 4, 64, 0.3, rng));
  const Vec a = gaussian(dim, rng), v = gaussian(dim, rng);
  const Vec upstream = gaussian(64, rng);
  for (auto _ : state) {
    layer.forward(a, v, FbpOptions{Mode::kTrain, true}, rng);
    benchmark::DoNotOptimize(layer.backward(upstream));
  }
}
BENCHMARK(BM_FbpForwardBackward)->Arg(16)->Arg(128);

static void BM_SelfAttention(benchmark::State& state) {
  Rng rng(3);
  const FeatureSet fs = frames(static_cast<std::size_t>(state.range(0)), 512, rng);
  const SelfAttnParams p = SelfAttnParams::init(512, rng);
  for (auto _ : state) benchmark::DoNotOptimize(self_attend(fs, p));
}
BENCHMARK(BM_SelfAttention)->Arg(8)->Arg(64);

static void BM_RelationAttention(benchmark::State& state) {
  Rng rng(4);
  const FeatureSet fs = frames(static_cast<std::size_t>(state.range(0)), 512, rng);
  const SelfAttnParams p0 = SelfAttnParams::init(512, rng);
  const RelationAttnParams p1 = RelationAttnParams::init(512, rng);
  for (auto _ : state) benchmark::DoNotOptimize(relation_attend(fs, p0, p1));
}
BENCHMARK(BM_RelationAttention)->Arg(8)->Arg(64);

static void BM_TransformerAttention(benchmark::State& state) {
  Rng rng(5);
  const FeatureSet fs = frames(static_cast<std::size_t>(state.range(0)), 512, rng);
  const TransformerAttnParams p = TransformerAttnParams::init(512, 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(transformer_attend(fs, p));
}
BENCHMARK(BM_TransformerAttention)->Arg(8)->Arg(64);

static void BM_SpeechSpectrogram(benchmark::State& state) {
  const AudioClip clip = one_second_tone();
  for (auto _ : state) benchmark::DoNotOptimize(speech_spectrogram(clip));
}
BENCHMARK(BM_SpeechSpectrogram)->Unit(benchmark::kMillisecond);

static void BM_LogMel3d(benchmark::State& state) {
  const AudioClip clip = one_second_tone();
  for (auto _ : state) benchmark::DoNotOptimize(log_mel_3d(clip));
}
BENCHMARK(BM_LogMel3d)->Unit(benchmark::kMillisecond);

static void BM_DirectDft(benchmark::State& state) {
  Rng rng(6);
  const Vec x = gaussian(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(dft(x.values()));
}
BENCHMARK(BM_DirectDft)->Arg(64)->Arg(1024);

static void BM_Fft(benchmark::State& state) {
  Rng rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vec x = gaussian(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fft_real(x.values(), n));
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(1024);

static void BM_SoftmaxCrossEntropy(benchmark::State& state) {
  Rng rng(8);
  const SoftmaxParams p = SoftmaxParams::init(7, 64, rng);
  const Vec x = gaussian(64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cross_entropy_backward(x, 3, p));
}
BENCHMARK(BM_SoftmaxCrossEntropy);
BENCHMARK_MAIN();
