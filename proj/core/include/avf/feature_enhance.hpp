#pragma once

// Test-time-augmentation feature aggregators.

#include <vector>

#include "avf/numeric.hpp"

namespace avf {

struct TtaTransform {
  double rotation_deg = 0.0;
  double scale = 1.0;
  bool flipped = false;

  bool operator==(const TtaTransform&) const = default;
};

inline const std::vector<double> kDefaultTtaRotations{-2.0, 0.0, 2.0};
inline const std::vector<double> kDefaultTtaScales{1.0, 1.03, 1.07};

/// Cartesian product in rotation-major, then scale, then flip order. With
/// flip enabled each (rotation, scale) pair yields the unflipped descriptor
/// first. Throws InvalidArgument on an empty list.
std::vector<TtaTransform> enumerate_tta(const std::vector<double>& rotations,
                                        const std::vector<double>& scales, bool flip);

/// Non-empty bag of equal-dimension features, one per transform.
using FeatureBag = std::vector<Vec>;

Vec f_mean(const FeatureBag& bag);
/// [mean : population std], element-wise.
Vec f_meanstd(const FeatureBag& bag);
/// [re(X) : im(X)] / ||X||, X the DFT of `basic`; zero input gives zeros.
Vec f_normfft(const Vec& basic);
Vec f_ar_mean(const Vec& mean_a, const Vec& mean_r);

}  // namespace avf
