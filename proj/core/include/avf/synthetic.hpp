#pragma once

// Synthetic two-modality datasets.
//
// clustered:   each class owns a Gaussian prototype per modality; every frame
//              is prototype + noise * N(0, I).
// interaction: per sample a ~ N(0, I_m), v ~ N(0, I_n); the label is
//              [sign(a.p) * sign(v.q) > 0] for fixed random unit p, q. Each
//              modality alone carries no information about the label.
//
// Visual frames pass through the configured feature enhancement: every frame
// is rendered as one view per TTA descriptor and the bag is aggregated.

#include <cstddef>
#include <vector>

#include "avf/config.hpp"
#include "avf/feature_set.hpp"
#include "avf/rng.hpp"

namespace avf {

struct Sample {
  FeatureSet audio;
  FeatureSet visual;
  std::size_t label;

  bool operator==(const Sample&) const = default;
};

struct SyntheticDataset {
  std::vector<Sample> samples;
  std::size_t classes = 0;

  bool operator==(const SyntheticDataset&) const = default;
};

/// Throws InvalidConfig when the configuration cannot produce a valid
/// dataset (e.g. a class would receive no sample).
SyntheticDataset gen_synthetic(const ExperimentConfig& cfg, Rng& rng);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded 80/20 shuffle split; test receives samples - floor(0.8 * samples).
Split train_test_split(std::size_t samples, Rng& rng);

}  // namespace avf
