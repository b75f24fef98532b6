#pragma once

// End-to-end audio-visual classifier: each modality's frames go through an
// intra-fusion branch, the two pooled vectors are fused (FBP or concat) and
// the result feeds a softmax classifier.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "avf/classifier.hpp"
#include "avf/config.hpp"
#include "avf/cross_fusion.hpp"
#include "avf/feature_set.hpp"
#include "avf/intra_fusion.hpp"
#include "avf/rng.hpp"
#include "avf/synthetic.hpp"

namespace avf {

struct ModelSpec {
  std::size_t audio_dim = 16;
  std::size_t visual_dim = 16;
  IntraKind audio_intra = IntraKind::kSelf;
  IntraKind visual_intra = IntraKind::kSelf;
  std::size_t attention_hidden = 8;
  CrossKind cross = CrossKind::kFbp;
  std::size_t fbp_k = 4;
  std::size_t fbp_o = 64;
  double fbp_dropout = 0.3;
  std::size_t classes = 7;
};

/// Model shape for a config; the visual input dim accounts for enhancement.
ModelSpec model_spec(const ExperimentConfig& cfg);

/// Output dimension of an intra-fusion branch over d-dim features.
std::size_t intra_output_dim(IntraKind kind, std::size_t d) noexcept;

/// One modality's intra-fusion layer.
class IntraBranch {
 public:
  IntraBranch(IntraKind kind, std::size_t dim, std::size_t hidden, Rng& rng);

  IntraKind kind() const noexcept { return kind_; }
  std::size_t output_dim() const noexcept;

  /// Pure forward pass with the current parameters.
  Vec pool(const FeatureSet& fs) const;
  /// Forward pass that caches intermediates for backward().
  Vec forward(const FeatureSet& fs);
  /// Flattened parameter gradients in collect() order.
  std::vector<std::vector<double>> backward(const Vec& upstream) const;

  void collect(const std::string& prefix, std::vector<TensorRef>& out);

 private:
  IntraKind kind_;
  std::size_t dim_;
  std::variant<SelfAttention, RelationAttention, TransformerAttention> layer_;
};

/// Flat gradient storage matching FusionModel::tensors() entry by entry.
struct GradientBuffer {
  std::vector<std::vector<double>> slots;

  void zero();
  /// Views named after the model tensors, suitable for grad_check().
  std::vector<TensorRef> views(const std::vector<TensorRef>& model_tensors);
};

class FusionModel {
 public:
  FusionModel(const ModelSpec& spec, Rng& init_rng);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t fused_dim() const noexcept;

  /// All trainable tensors in a fixed order (checkpoint order).
  std::vector<TensorRef> tensors();
  GradientBuffer make_gradient_buffer();

  /// Eval-mode fused vector.
  Vec fuse(const FeatureSet& audio, const FeatureSet& visual) const;
  ClassScores predict(const FeatureSet& audio, const FeatureSet& visual) const;

  /// Forward + backward for one sample; adds parameter gradients of the
  /// cross-entropy loss into `grads` and returns the loss. In train mode a
  /// fresh FBP dropout mask is drawn from `rng`.
  double accumulate(const Sample& s, Mode mode, Rng& rng, GradientBuffer& grads);
  /// Same with a fixed multiplicative FBP mask (empty = no dropout).
  double accumulate_with_mask(const Sample& s, const std::vector<double>& fbp_mask,
                              GradientBuffer& grads);
  /// Loss only, with a fixed FBP mask.
  double loss_with_mask(const Sample& s, const std::vector<double>& fbp_mask) const;

  /// params -= scale * grads
  void apply_step(const GradientBuffer& grads, double scale);

 private:
  double backprop(const Sample& s, const Vec& audio_vec, const Vec& visual_vec,
                  const Vec& fused, GradientBuffer& grads);
  Vec fuse_pooled(const Vec& a, const Vec& v, const std::vector<double>& mask) const;

  ModelSpec spec_;
  IntraBranch audio_;
  IntraBranch visual_;
  std::optional<FbpLayer> fbp_;
  SoftmaxParams classifier_;
};

}  // namespace avf
