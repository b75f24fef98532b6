#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "avf/numeric.hpp"

namespace avf {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares analytic gradients against central differences
/// (f(t+eps) - f(t-eps)) / 2eps for every entry of every parameter tensor.
///
/// `params[i]` and `analytic[i]` must have equal sizes. Parameters are
/// perturbed in place and restored. The per-entry error is
/// |g_a - g_n| / max(|g_a|, |g_n|, 1e-8); the maximum is reported.
///
/// Throws NonDeterministicLoss if two evaluations at the unperturbed point
/// differ, InvalidArgument if epsilon is outside [1e-7, 1e-3].
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<TensorRef>& params,
                           const std::vector<TensorRef>& analytic, double epsilon = 1e-5);

}  // namespace avf
