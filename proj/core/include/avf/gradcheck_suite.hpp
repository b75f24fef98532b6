#pragma once

// Seeded finite-difference checks of every hand-derived backward pass.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace avf {

struct ModuleGradCheck {
  std::string module;
  std::size_t instances = 0;
  std::size_t entries = 0;
  double max_rel_err = 0.0;
  std::string worst;  // tensor[index] of the largest error
};

inline constexpr double kGradCheckTolerance = 1e-4;

/// Module names accepted by run_gradcheck(): self, relation, transformer,
/// fbp, classifier, patch, pipeline; "all" runs every one.
const std::vector<std::string>& gradcheck_modules();

/// Throws InvalidArgument for unknown module names.
std::vector<ModuleGradCheck> run_gradcheck(std::string_view module, std::size_t instances = 10,
                                           std::uint64_t seed = 2020);

}  // namespace avf
