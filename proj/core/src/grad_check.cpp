#include "avf/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "avf/error.hpp"

namespace avf {

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<TensorRef>& params,
                           const std::vector<TensorRef>& analytic, double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw InvalidArgument("grad_check epsilon must lie in [1e-7, 1e-3]");
  }
  if (params.size() != analytic.size()) {
    throw DimMismatch("grad_check: parameter and gradient tensor counts differ");
  }

  const double base = loss_fn();
  const double again = loss_fn();
  // Bitwise comparison: any difference means hidden state (e.g. live dropout).
  if (!(base == again) || !std::isfinite(base)) {
    throw NonDeterministicLoss("loss evaluated twice at identical parameters gave " +
                               std::to_string(base) + " and " + std::to_string(again));
  }

  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const TensorRef& p = params[t];
    const TensorRef& g = analytic[t];
    if (p.values.size() != g.values.size()) {
      throw DimMismatch("grad_check: tensor '" + p.name + "' size differs from its gradient");
    }
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double saved = p.values[i];
      p.values[i] = saved + epsilon;
      const double up = loss_fn();
      p.values[i] = saved - epsilon;
      const double down = loss_fn();
      p.values[i] = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = g.values[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_err || !std::isfinite(rel)) {
        report.max_rel_err = rel;
        report.worst_tensor = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace avf
