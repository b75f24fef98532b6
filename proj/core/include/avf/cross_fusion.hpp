#pragma once

// Cross-modal fusion of one audio vector a (dim m) and one visual vector v
// (dim n).
//
// Factorized bilinear pooling:
//   h = (U~^T a) o (V~^T v)                 in R^{k*o}
//   h <- dropout(h)                          train mode only, inverted scaling
//   z_i = sum_{j<k} h[i*k + j]               non-overlapping sum pooling
//   z <- z / ||z||                           skipped when z == 0
//
// Each z_i equals a^T W_i v with W_i = sum_j u~_{ik+j} v~_{ik+j}^T, which
// fbp_expand() materializes for verification.

#include <optional>
#include <string>
#include <vector>

#include "avf/numeric.hpp"
#include "avf/rng.hpp"

namespace avf {

enum class Mode { kTrain, kEval };

struct FBPParams {
  Mat u_tilde;  // m x (k*o)
  Mat v_tilde;  // n x (k*o)
  std::size_t k = 4;
  std::size_t o = 64;
  double dropout_p = 0.3;

  /// Zero projections. Throws InvalidArgument for k or o of 0 or dropout_p outside [0, 1).
  static FBPParams zeros(std::size_t m, std::size_t n, std::size_t k, std::size_t o,
                         double dropout_p);
  /// Projections ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static FBPParams init(std::size_t m, std::size_t n, std::size_t k, std::size_t o,
                        double dropout_p, Rng& rng);

  std::size_t audio_dim() const noexcept { return u_tilde.rows(); }
  std::size_t visual_dim() const noexcept { return v_tilde.rows(); }
  std::vector<TensorRef> tensors(const std::string& prefix);
  void validate() const;
};

struct FusedVec {
  Vec values;
  bool norm_applied = false;
};

struct FbpOptions {
  Mode mode = Mode::kEval;
  bool l2_normalize = true;
};

/// Forward pass. `rng` is consulted only in train mode with dropout_p > 0.
FusedVec fbp_fuse(const Vec& a, const Vec& v, const FBPParams& p, Mode mode, Rng& rng);
FusedVec fbp_fuse(const Vec& a, const Vec& v, const FBPParams& p, const FbpOptions& opts,
                  Rng& rng);

/// The o implicit bilinear matrices W_i (each m x n).
std::vector<Mat> fbp_expand(const FBPParams& p);

FusedVec concat_fuse(const Vec& a, const Vec& v);

/// Multiplicative dropout mask over the k*o product entries: 0 for dropped
/// entries, 1/(1-p) for kept ones (all ones when p == 0).
std::vector<double> draw_dropout_mask(std::size_t size, double p, Rng& rng);

struct FbpGrads {
  Mat u_tilde;
  Mat v_tilde;
  Vec a;
  Vec v;
};

/// Stateful FBP layer that caches its forward intermediates for backward().
class FbpLayer {
 public:
  explicit FbpLayer(FBPParams params) : params_(std::move(params)) { params_.validate(); }

  /// Draws a fresh mask in train mode, uses none in eval mode.
  const FusedVec& forward(const Vec& a, const Vec& v, const FbpOptions& opts, Rng& rng);
  /// Forward with a caller-supplied multiplicative mask (frozen dropout).
  const FusedVec& forward_with_mask(const Vec& a, const Vec& v, std::vector<double> mask,
                                    bool l2_normalize = true);
  /// Throws MissingForwardCache when no forward pass preceded the call.
  FbpGrads backward(const Vec& upstream) const;

  FBPParams& params() noexcept { return params_; }
  const FBPParams& params() const noexcept { return params_; }
  /// Mask of the last forward pass (empty when no dropout was applied).
  const std::vector<double>& last_mask() const;

 private:
  struct Cache {
    Vec a;
    Vec v;
    Vec proj_a;
    Vec proj_v;
    std::vector<double> mask;
    Vec pooled;  // pre-normalization z
    FusedVec output;
    bool l2_normalize;
  };
  FBPParams params_;
  std::optional<Cache> cache_;
};

}  // namespace avf
