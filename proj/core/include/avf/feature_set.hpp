#pragma once

#include <cstddef>
#include <vector>

#include "avf/numeric.hpp"

namespace avf {

/// Ordered, non-empty collection of equal-dimension feature vectors.
class FeatureSet {
 public:
  /// Throws InvalidArgument when empty and DimMismatch when dimensions differ.
  explicit FeatureSet(std::vector<Vec> vectors);

  std::size_t size() const noexcept { return vectors_.size(); }
  std::size_t dim() const noexcept { return vectors_.front().dim(); }

  const Vec& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<Vec>& vectors() const noexcept { return vectors_; }

  auto begin() const noexcept { return vectors_.begin(); }
  auto end() const noexcept { return vectors_.end(); }

  bool operator==(const FeatureSet&) const = default;

 private:
  std::vector<Vec> vectors_;
};

}  // namespace avf
