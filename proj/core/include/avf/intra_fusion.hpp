#pragma once

// Intra-modal fusion: collapse a FeatureSet {f_1..f_n} into one vector with
// self-, relation- or transformer-attention.
//
//   self:        a_i = sigmoid(f_i . w0),          f_s = sum a_i f_i / sum a_j
//   relation:    b_i = sigmoid([f_i:f_s] . w1),    f_r = sum a_i b_i [f_i:f_s] / sum a_j b_j
//   transformer: g_i = exp(u . tanh(W2 f_i + b)),  f_t = sum g_i f_i / sum g_j
//
// The free functions are pure forward passes. The layer classes cache the
// last forward pass so backward() can produce gradients for the parameters
// and for every input feature.

#include <optional>
#include <string>
#include <vector>

#include "avf/feature_set.hpp"
#include "avf/numeric.hpp"
#include "avf/rng.hpp"

namespace avf {

struct SelfAttnParams {
  Mat w0;  // d x 1

  static SelfAttnParams zeros(std::size_t d);
  /// w0 ~ U(-1/sqrt(d), 1/sqrt(d)).
  static SelfAttnParams init(std::size_t d, Rng& rng);
  std::size_t dim() const noexcept { return w0.rows(); }
  std::vector<TensorRef> tensors(const std::string& prefix);
};

struct RelationAttnParams {
  Mat w1;  // 2d x 1

  static RelationAttnParams zeros(std::size_t d);
  static RelationAttnParams init(std::size_t d, Rng& rng);
  std::size_t dim() const noexcept { return w1.rows() / 2; }
  std::vector<TensorRef> tensors(const std::string& prefix);
};

struct TransformerAttnParams {
  Mat w2;  // m x d
  Vec b;   // m
  Vec u;   // m

  static TransformerAttnParams zeros(std::size_t d, std::size_t hidden);
  /// w2 scaled-uniform, b and u zero.
  static TransformerAttnParams init(std::size_t d, std::size_t hidden, Rng& rng);
  std::size_t dim() const noexcept { return w2.cols(); }
  std::size_t hidden() const noexcept { return w2.rows(); }
  std::vector<TensorRef> tensors(const std::string& prefix);
};

struct SelfAttnOutput {
  Vec pooled;                  // d
  std::vector<double> alpha;   // unnormalized sigmoid gates
  std::vector<double> weights; // alpha_i / sum alpha_j, computed in log space
};

struct RelationAttnOutput {
  Vec pooled;  // 2d; trailing d entries are f_s
  Vec self_pooled;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> weights;  // alpha_i beta_i / sum alpha_j beta_j
};

struct TransformerAttnOutput {
  Vec pooled;                      // d
  std::vector<double> log_gamma;   // u . tanh(f'_i), i.e. log of the raw weight
  std::vector<double> weights;     // gamma_i / sum gamma_j
};

SelfAttnOutput self_attend(const FeatureSet& fs, const SelfAttnParams& p);
RelationAttnOutput relation_attend(const FeatureSet& fs, const SelfAttnParams& p0,
                                   const RelationAttnParams& p1);
TransformerAttnOutput transformer_attend(const FeatureSet& fs, const TransformerAttnParams& p);

struct SelfAttnGrads {
  SelfAttnParams params;
  std::vector<Vec> features;
};

struct RelationAttnGrads {
  SelfAttnParams self_params;
  RelationAttnParams params;
  std::vector<Vec> features;
};

struct TransformerAttnGrads {
  TransformerAttnParams params;
  std::vector<Vec> features;
};

class SelfAttention {
 public:
  explicit SelfAttention(SelfAttnParams params) : params_(std::move(params)) {}

  const SelfAttnOutput& forward(const FeatureSet& fs);
  /// Throws MissingForwardCache when no forward pass preceded the call.
  SelfAttnGrads backward(const Vec& upstream) const;

  SelfAttnParams& params() noexcept { return params_; }
  const SelfAttnParams& params() const noexcept { return params_; }

 private:
  struct Cache {
    FeatureSet input;
    SelfAttnOutput output;
  };
  SelfAttnParams params_;
  std::optional<Cache> cache_;
};

class RelationAttention {
 public:
  RelationAttention(SelfAttnParams self_params, RelationAttnParams params)
      : self_params_(std::move(self_params)), params_(std::move(params)) {}

  const RelationAttnOutput& forward(const FeatureSet& fs);
  RelationAttnGrads backward(const Vec& upstream) const;

  SelfAttnParams& self_params() noexcept { return self_params_; }
  const SelfAttnParams& self_params() const noexcept { return self_params_; }
  RelationAttnParams& params() noexcept { return params_; }
  const RelationAttnParams& params() const noexcept { return params_; }

 private:
  struct Cache {
    FeatureSet input;
    RelationAttnOutput output;
  };
  SelfAttnParams self_params_;
  RelationAttnParams params_;
  std::optional<Cache> cache_;
};

class TransformerAttention {
 public:
  explicit TransformerAttention(TransformerAttnParams params) : params_(std::move(params)) {}

  const TransformerAttnOutput& forward(const FeatureSet& fs);
  TransformerAttnGrads backward(const Vec& upstream) const;

  TransformerAttnParams& params() noexcept { return params_; }
  const TransformerAttnParams& params() const noexcept { return params_; }

 private:
  struct Cache {
    FeatureSet input;
    TransformerAttnOutput output;
    std::vector<Vec> hidden;  // tanh(f'_i)
  };
  TransformerAttnParams params_;
  std::optional<Cache> cache_;
};

}  // namespace avf
