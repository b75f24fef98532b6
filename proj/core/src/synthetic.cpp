#include "avf/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "avf/error.hpp"
#include "avf/feature_enhance.hpp"

namespace avf {
namespace {

Vec gaussian(std::size_t d, Rng& rng, double scale = 1.0) {
  Vec v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

Vec unit_gaussian(std::size_t d, Rng& rng) {
  Vec v = gaussian(d, rng);
  const double n = norm2(v.values());
  for (double& x : v) x /= n;
  return v;
}

Vec jitter(const Vec& base, double noise, Rng& rng) {
  Vec out = base;
  for (double& x : out) x += noise * rng.normal();
  return out;
}

// Deterministic per-dataset rendering of TTA views: each descriptor shifts
// the frame along fixed directions in proportion to its rotation, scale
// offset and flip, plus view noise.
class ViewRenderer {
 public:
  ViewRenderer(const ExperimentConfig& cfg, Rng& rng)
      : transforms_(enumerate_tta(cfg.tta_rotations, cfg.tta_scales, cfg.tta_flip)),
        rotation_dir_(gaussian(cfg.visual_dim, rng, 0.01)),
        scale_dir_(gaussian(cfg.visual_dim, rng, 0.5)),
        flip_dir_(gaussian(cfg.visual_dim, rng, 0.05)),
        second_backbone_(cfg.visual_dim, cfg.visual_dim),
        view_noise_(0.25 * cfg.noise) {
    const double s = 1.0 / std::sqrt(static_cast<double>(cfg.visual_dim));
    for (double& w : second_backbone_.values()) w = s * rng.normal();
  }

  FeatureBag render(const Vec& frame, Rng& rng) const {
    FeatureBag bag;
    bag.reserve(transforms_.size());
    for (const TtaTransform& t : transforms_) bag.push_back(render_one(frame, t, rng));
    return bag;
  }

  Vec identity_view(const Vec& frame, Rng& rng) const {
    return render_one(frame, TtaTransform{0.0, 1.0, false}, rng);
  }

  Vec second_backbone(const Vec& view) const { return matvec(second_backbone_, view); }

 private:
  Vec render_one(const Vec& frame, const TtaTransform& t, Rng& rng) const {
    Vec out = frame;
    axpy(t.rotation_deg, rotation_dir_.values(), out.values());
    axpy(t.scale - 1.0, scale_dir_.values(), out.values());
    if (t.flipped) axpy(1.0, flip_dir_.values(), out.values());
    for (double& x : out) x += view_noise_ * rng.normal();
    return out;
  }

  std::vector<TtaTransform> transforms_;
  Vec rotation_dir_;
  Vec scale_dir_;
  Vec flip_dir_;
  Mat second_backbone_;
  double view_noise_;
};

Vec enhance_frame(const Vec& frame, Enhancement e, const ViewRenderer& views, Rng& rng) {
  switch (e) {
    case Enhancement::kNone: return frame;
    case Enhancement::kMean: return f_mean(views.render(frame, rng));
    case Enhancement::kMeanStd: return f_meanstd(views.render(frame, rng));
    case Enhancement::kNormFft: return f_normfft(views.identity_view(frame, rng));
    case Enhancement::kArMean: {
      const FeatureBag bag = views.render(frame, rng);
      FeatureBag other;
      other.reserve(bag.size());
      for (const Vec& v : bag) other.push_back(views.second_backbone(v));
      return f_ar_mean(f_mean(bag), f_mean(other));
    }
  }
  return frame;
}

FeatureSet frames_around(const Vec& centre, std::size_t count, double noise, Rng& rng) {
  std::vector<Vec> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) frames.push_back(jitter(centre, noise, rng));
  return FeatureSet(std::move(frames));
}

FeatureSet visual_frames(const Vec& centre, const ExperimentConfig& cfg, const ViewRenderer& views,
                         Rng& rng) {
  std::vector<Vec> frames;
  frames.reserve(cfg.visual_frames);
  for (std::size_t i = 0; i < cfg.visual_frames; ++i) {
    frames.push_back(enhance_frame(jitter(centre, cfg.noise, rng), cfg.enhancement, views, rng));
  }
  return FeatureSet(std::move(frames));
}

}  // namespace

SyntheticDataset gen_synthetic(const ExperimentConfig& cfg, Rng& rng) {
  validate(cfg);
  const ViewRenderer views(cfg, rng);
  SyntheticDataset ds;
  ds.classes = cfg.classes;
  ds.samples.reserve(cfg.samples);

  if (cfg.data_mode == DataMode::kClustered) {
    std::vector<Vec> audio_proto, visual_proto;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
      audio_proto.push_back(gaussian(cfg.audio_dim, rng));
      visual_proto.push_back(gaussian(cfg.visual_dim, rng));
    }
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const std::size_t label = i % cfg.classes;
      FeatureSet audio = frames_around(audio_proto[label], cfg.audio_frames, cfg.noise, rng);
      FeatureSet visual = visual_frames(visual_proto[label], cfg, views, rng);
      ds.samples.push_back({std::move(audio), std::move(visual), label});
    }
  } else {
    const Vec p = unit_gaussian(cfg.audio_dim, rng);
    const Vec q = unit_gaussian(cfg.visual_dim, rng);
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const Vec a = gaussian(cfg.audio_dim, rng);
      const Vec v = gaussian(cfg.visual_dim, rng);
      const bool agree = (dot(a.values(), p.values()) > 0.0) == (dot(v.values(), q.values()) > 0.0);
      FeatureSet audio = frames_around(a, cfg.audio_frames, cfg.noise, rng);
      FeatureSet visual = visual_frames(v, cfg, views, rng);
      ds.samples.push_back({std::move(audio), std::move(visual), agree ? 1U : 0U});
    }
  }

  std::vector<std::size_t> counts(cfg.classes, 0);
  for (const Sample& s : ds.samples) ++counts[s.label];
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    if (counts[c] == 0) {
      throw InvalidConfig("synthetic dataset has no sample of class " + std::to_string(c));
    }
  }
  return ds;
}

Split train_test_split(std::size_t samples, Rng& rng) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_train = samples * 8 / 10;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

}  // namespace avf
