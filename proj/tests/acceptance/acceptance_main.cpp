// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <unistd.h>

#include "avf/audio_frontend.hpp"
#include "avf/classifier.hpp"
#include "avf/config.hpp"
#include "avf/cross_fusion.hpp"
#include "avf/experiment.hpp"
#include "avf/feature_enhance.hpp"
#include "avf/feature_io.hpp"
#include "avf/gradcheck_suite.hpp"
#include "avf/intra_fusion.hpp"

using namespace avf;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

Vec random_vec(std::size_t d, Rng& rng) {
  Vec v(d);
  for (double& x : v) x = rng.normal();
  return v;
}

std::vector<Vec> random_vectors(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_vec(d, rng));
  return out;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome gradient_integrity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const ModuleGradCheck& m : run_gradcheck("all", 10, 2020)) {
    worst = std::max(worst, m.max_rel_err);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s max_rel_err %.3e at %s", m.module.c_str(), m.max_rel_err, m.worst.c_str());
    require(o, m.max_rel_err < kGradCheckTolerance && m.instances >= 10, buf);
  }
  const double secs = seconds_since(t0);
  require(o, secs < 60.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "7 modules x 10 instances, worst %.2e, %.2f s", worst, secs);
    o.detail = buf;
  }
  return o;
}

Outcome fbp_factorization() {
  Outcome o;
  Rng rng(8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = pick(rng, 1, 8), n = pick(rng, 1, 8), k = pick(rng, 1, 4), out = pick(rng, 1, 3);
    FBPParams p = FBPParams::zeros(m, n, k, out, 0.3);
    for (double& x : p.u_tilde.values()) x = rng.normal();
    for (double& x : p.v_tilde.values()) x = rng.normal();
    const Vec a = random_vec(m, rng), v = random_vec(n, rng);
    const FusedVec z = fbp_fuse(a, v, p, FbpOptions{Mode::kEval, false}, rng);
    const std::vector<Mat> w = fbp_expand(p);
    for (std::size_t i = 0; i < out; ++i) {
      double explicit_z = 0.0;
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) explicit_z += a[r] * w[i](r, c) * v[c];
      worst = std::max(worst, std::abs(explicit_z - z.values[i]));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "100 instances, max abs diff %.2e", worst);
  require(o, worst < 1e-9, buf);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome attention_invariants() {
  Outcome o;
  Rng rng(9);
  const int instances = 200;
  for (int t = 0; t < instances && o.pass; ++t) {
    const std::size_t d = pick(rng, 1, 8), n = pick(rng, 2, 8);
    SelfAttnParams p0 = SelfAttnParams::zeros(d);
    RelationAttnParams p1 = RelationAttnParams::zeros(d);
    TransformerAttnParams p2 = TransformerAttnParams::zeros(d, pick(rng, 1, 5));
    for (auto* span : {&p0.w0, &p1.w1, &p2.w2})
      for (double& x : span->values()) x = rng.normal();
    for (double& x : p2.b) x = rng.normal();
    for (double& x : p2.u) x = rng.normal();

    std::vector<Vec> f = random_vectors(n, d, rng);
    std::vector<Vec> g = f;
    rng.shuffle(std::span<Vec>(g));
    const FeatureSet a(f), b(g);

    const SelfAttnOutput sa = self_attend(a, p0);
    const RelationAttnOutput ra = relation_attend(a, p0, p1);
    const TransformerAttnOutput ta = transformer_attend(a, p2);
    require(o, max_abs_diff(sa.pooled, self_attend(b, p0).pooled) <= 1e-12, "self permutation");
    require(o, max_abs_diff(ra.pooled, relation_attend(b, p0, p1).pooled) <= 1e-12, "relation permutation");
    require(o, max_abs_diff(ta.pooled, transformer_attend(b, p2).pooled) <= 1e-12, "transformer permutation");

    const FeatureSet one({f[0]});
    require(o, self_attend(one, p0).pooled == f[0], "self n=1 identity");
    require(o, transformer_attend(one, p2).pooled == f[0], "transformer n=1 identity");
    require(o, relation_attend(one, p0, p1).pooled == concat(f[0], f[0]), "relation n=1 identity");

    for (std::size_t j = 0; j < d; ++j) {
      double lo = f[0][j], hi = f[0][j];
      for (const Vec& x : f) {
        lo = std::min(lo, x[j]);
        hi = std::max(hi, x[j]);
      }
      require(o, sa.pooled[j] >= lo - 1e-12 && sa.pooled[j] <= hi + 1e-12, "self convex hull");
      require(o, ta.pooled[j] >= lo - 1e-12 && ta.pooled[j] <= hi + 1e-12, "transformer convex hull");
      require(o, ra.pooled[d + j] == sa.pooled[j], "relation trailing block != self pooled");
    }
    double wsum = 0.0;
    for (double w : ta.weights) {
      require(o, w >= 0.0, "negative transformer weight");
      wsum += w;
    }
    require(o, std::abs(wsum - 1.0) < 1e-12, "transformer weights do not sum to 1");
  }
  if (o.pass) o.detail = std::to_string(instances) + " instances per property";
  return o;
}

ExperimentConfig interaction_config(const char* cross) {
  return parse_config(std::string(
                          "seed=7\ndata.mode=interaction\ndata.samples=2000\ndata.noise=0.1\n"
                          "audio.dim=8\naudio.frames=4\nvisual.dim=8\nvisual.frames=4\n"
                          "fbp.k=4\nfbp.o=16\nfbp.dropout=0\nclassifier.classes=2\n"
                          "classifier.lr=0.5\nclassifier.epochs=40\nclassifier.batch_size=16\n"
                          "fusion.cross=") +
                      cross + "\n");
}

Outcome bilinear_interaction() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double concat = run_experiment(interaction_config("concat")).metrics.accuracy;
  const double fbp = run_experiment(interaction_config("fbp")).metrics.accuracy;
  const double secs = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "concat %.4f (<= 0.60), fbp %.4f (>= 0.90), %.1f s", concat, fbp, secs);
  require(o, concat <= 0.60 && fbp >= 0.90 && secs < 300.0, buf);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome audio_frontend() {
  Outcome o;
  AudioClip tone;
  for (int t = 0; t < 16000; ++t) tone.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * t / 16000.0));
  const Spectrogram s = speech_spectrogram(tone);
  require(o, s.frames == 97 && s.bins == 200, "spectrogram shape " + std::to_string(s.frames) + "x" + std::to_string(s.bins));
  for (std::size_t f = 0; f < s.frames && o.pass; ++f) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < s.bins; ++b)
      if (s.at(f, b) > s.at(f, best)) best = b;
    require(o, best == 64, "tone peak at bin " + std::to_string(best));
  }
  const MelCube m = log_mel_3d(tone);
  require(o, m.bands == 40 && m.frames == 97 && m.static_mel.size() == 40 * 97 && m.delta.size() == 40 * 97 &&
                 m.delta_delta.size() == 40 * 97,
          "mel cube shape");

  AudioClip flat;
  flat.samples.assign(16000, 0.25);
  const MelCube c = log_mel_3d(flat);
  const bool zero = std::all_of(c.delta.begin(), c.delta.end(), [](double v) { return v == 0.0; }) &&
                    std::all_of(c.delta_delta.begin(), c.delta_delta.end(), [](double v) { return v == 0.0; });
  require(o, zero, "constant input has nonzero deltas");
  if (o.pass) o.detail = "97x200 spectrogram, 40x97x3 mel cube, 1 kHz peak at bin 64, zero deltas";
  return o;
}

Outcome class_reweighting() {
  Outcome o;
  const ClassScores uniform{Vec(7, 1.0 / 7.0)};
  const std::size_t pred = apply_class_weights(uniform, ClassWeights(kDefaultClassWeights)).predicted;
  require(o, pred == 6, "uniform probs predict " + std::to_string(pred));
  Rng rng(10);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = pick(rng, 2, 9);
    Vec z = random_vec(c, rng);
    const ClassScores s{softmax(z)};
    require(o, apply_class_weights(s, ClassWeights::uniform(c)).predicted == argmax(s.probs.values()),
            "uniform weights changed an argmax");
  }
  if (o.pass) o.detail = "uniform probs -> index 6; 1000 uniform-weight argmaxes unchanged";
  return o;
}

Outcome enhancement_aggregators() {
  Outcome o;
  Rng rng(11);
  for (int t = 0; t < 200 && o.pass; ++t) {
    const std::size_t d = pick(rng, 1, 10);
    const FeatureBag bag = random_vectors(pick(rng, 2, 18), d, rng);
    FeatureBag shuffled = bag;
    rng.shuffle(std::span<Vec>(shuffled));
    require(o, f_mean(bag).dim() == d && f_meanstd(bag).dim() == 2 * d && f_normfft(bag[0]).dim() == 2 * d &&
                   f_ar_mean(f_mean(bag), f_mean(shuffled)).dim() == 2 * d,
            "dimension contract");
    require(o, max_abs_diff(f_mean(bag), f_mean(shuffled)) <= 1e-12, "f_mean permutation");
    require(o, max_abs_diff(f_meanstd(bag), f_meanstd(shuffled)) <= 1e-12, "f_meanstd permutation");
    const FeatureBag same(bag.size(), bag[0]);
    const Vec ms = f_meanstd(same);
    for (std::size_t j = 0; j < d; ++j) require(o, ms[d + j] == 0.0, "identical bag std != 0");
    require(o, f_mean(same) == bag[0], "identical bag mean");
    require(o, std::abs(norm2(f_normfft(bag[0]).values()) - 1.0) < 1e-12, "f_normfft norm");
  }
  const std::size_t views = enumerate_tta(kDefaultTtaRotations, kDefaultTtaScales, true).size();
  require(o, views == 18, "default TTA enumeration has " + std::to_string(views) + " descriptors");
  if (o.pass) o.detail = "dims (d,2d,2d,2d), permutation, degeneracies, unit norm, 18 TTA views";
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto base = std::filesystem::temp_directory_path() / ("avf_acceptance_" + std::to_string(::getpid()));
  const std::vector<std::string> configs{
      "data.samples=210\nclassifier.epochs=8\n",
      "data.samples=210\nclassifier.epochs=8\naudio.intra=transformer\nvisual.intra=relation\nenhancement=meanstd\n",
      "data.samples=210\nclassifier.epochs=8\nfusion.cross=concat\nenhancement=ar_mean\ntrain.on_all=true\n",
  };
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig cfg = parse_config(configs[i]);
    const auto a = base / ("run" + std::to_string(i) + "a"), b = base / ("run" + std::to_string(i) + "b");
    run_experiment_to_dir(cfg, a);
    run_experiment_to_dir(cfg, b);
    for (const char* f : {"checkpoint.avfckpt", "report.txt", "confusion.csv"}) {
      require(o, read_file_bytes(a / f) == read_file_bytes(b / f), std::string(f) + " differs for config " + std::to_string(i));
    }
  }
  std::filesystem::remove_all(base);
  if (o.pass) o.detail = "3 configs trained twice, checkpoint/report/confusion byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient integrity", gradient_integrity},
      {"FBP factorization equivalence", fbp_factorization},
      {"attention invariants", attention_invariants},
      {"bilinear interaction experiment", bilinear_interaction},
      {"audio front-end", audio_frontend},
      {"class re-weighting", class_reweighting},
      {"enhancement aggregators", enhancement_aggregators},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu %-32s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
