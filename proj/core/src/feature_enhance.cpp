#include "avf/feature_enhance.hpp"

#include <cmath>
#include <string>

#include "avf/error.hpp"

namespace avf {
namespace {

void require_bag(const FeatureBag& bag, const char* who) {
  if (bag.empty()) throw InvalidArgument(std::string(who) + ": empty feature bag");
  const std::size_t d = bag.front().dim();
  for (const Vec& f : bag) {
    if (f.dim() != d) throw DimMismatch(std::string(who) + ": bag has mixed dimensions");
  }
}

}  // namespace

std::vector<TtaTransform> enumerate_tta(const std::vector<double>& rotations,
                                        const std::vector<double>& scales, bool flip) {
  if (rotations.empty() || scales.empty()) {
    throw InvalidArgument("enumerate_tta: rotation and scale lists must be non-empty");
  }
  std::vector<TtaTransform> out;
  out.reserve(rotations.size() * scales.size() * (flip ? 2 : 1));
  for (double r : rotations) {
    for (double s : scales) {
      out.push_back({r, s, false});
      if (flip) out.push_back({r, s, true});
    }
  }
  return out;
}

// Running (Welford) mean and population variance: a bag of identical
// vectors gives that vector and a variance of exactly zero.
Vec f_mean(const FeatureBag& bag) {
  require_bag(bag, "f_mean");
  Vec mean = bag.front();
  for (std::size_t i = 1; i < bag.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    for (std::size_t k = 0; k < mean.dim(); ++k) mean[k] += (bag[i][k] - mean[k]) / n;
  }
  return mean;
}

Vec f_meanstd(const FeatureBag& bag) {
  require_bag(bag, "f_meanstd");
  const std::size_t d = bag.front().dim();
  Vec out(2 * d);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = bag.front()[k], m2 = 0.0;
    for (std::size_t i = 1; i < bag.size(); ++i) {
      const double x = bag[i][k];
      const double delta = x - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (x - mean);
    }
    out[k] = mean;
    out[d + k] = std::sqrt(m2 / static_cast<double>(bag.size()));
  }
  return out;
}

Vec f_normfft(const Vec& basic) {
  const std::size_t d = basic.dim();
  const ComplexVec spectrum = dft(basic.values());
  double energy = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    energy += spectrum.re[k] * spectrum.re[k] + spectrum.im[k] * spectrum.im[k];
  }
  const double norm = std::sqrt(energy);
  Vec out(2 * d);
  if (norm == 0.0) return out;
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = spectrum.re[k] / norm;
    out[d + k] = spectrum.im[k] / norm;
  }
  return out;
}

Vec f_ar_mean(const Vec& mean_a, const Vec& mean_r) {
  if (mean_a.dim() != mean_r.dim()) {
    throw DimMismatch("f_ar_mean: " + std::to_string(mean_a.dim()) + " vs " +
                      std::to_string(mean_r.dim()));
  }
  return concat(mean_a, mean_r);
}

}  // namespace avf
