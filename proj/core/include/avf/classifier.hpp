#pragma once

// Softmax classifier, cross-entropy training and class re-weighting of
// predicted scores.

#include <cstddef>
#include <string>
#include <vector>

#include "avf/numeric.hpp"
#include "avf/rng.hpp"

namespace avf {

struct SoftmaxParams {
  Mat weight;  // C x d_in
  Vec bias;    // C

  static SoftmaxParams zeros(std::size_t classes, std::size_t input_dim);
  /// weight ~ U(-1/sqrt(d_in), 1/sqrt(d_in)), bias zero.
  static SoftmaxParams init(std::size_t classes, std::size_t input_dim, Rng& rng);

  std::size_t classes() const noexcept { return weight.rows(); }
  std::size_t input_dim() const noexcept { return weight.cols(); }
  std::vector<TensorRef> tensors(const std::string& prefix);
};

struct ClassScores {
  Vec probs;
};

/// Seven weights derived from the square roots of per-class training counts:
/// Angry, Disgust, Fear, Happy, Neutral, Sad, Surprise.
inline const std::vector<double> kDefaultClassWeights{0.15,  0.097, 0.129, 0.185,
                                                    0.138, 0.082, 0.215};

class ClassWeights {
 public:
  /// Throws InvalidArgument unless every entry is finite and > 0.
  explicit ClassWeights(std::vector<double> weights);
  static ClassWeights defaults() { return ClassWeights(kDefaultClassWeights); }
  static ClassWeights uniform(std::size_t classes);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& values() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

Vec logits(const Vec& x, const SoftmaxParams& p);
/// Max-subtracted softmax of arbitrary logits.
Vec softmax(const Vec& logits);
ClassScores softmax_forward(const Vec& x, const SoftmaxParams& p);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct ReweightedScores {
  Vec reweighted;
  std::size_t predicted;
};

/// reweighted_i = probs_i * w_i, no renormalization.
ReweightedScores apply_class_weights(const ClassScores& s, const ClassWeights& w);

struct CrossEntropyGrads {
  double loss;
  SoftmaxParams params;
  Vec input;
};

/// Loss -log p_label and its gradients. d loss / d logits = p - onehot(label).
CrossEntropyGrads cross_entropy_backward(const Vec& x, std::size_t label, const SoftmaxParams& p);

struct LabeledVec {
  Vec x;
  std::size_t label;
};

struct TrainOptions {
  double lr = 0.1;
  std::size_t epochs = 100;
  /// 0 means full batch.
  std::size_t batch_size = 0;
};

struct TrainResult {
  SoftmaxParams params;
  /// Mean cross-entropy over the dataset before each epoch's updates, plus
  /// the final value (epochs + 1 entries).
  std::vector<double> loss_curve;
};

/// Gradient descent on mean cross-entropy. Mini-batches are drawn by a
/// seeded shuffle each epoch. Throws EmptyDataset, InvalidArgument for
/// lr < 0 or labels out of range, NumericalDivergence if the loss turns NaN.
TrainResult train(const std::vector<LabeledVec>& data, SoftmaxParams p, const TrainOptions& opts,
                  Rng& rng);

double mean_cross_entropy(const std::vector<LabeledVec>& data, const SoftmaxParams& p);
double accuracy(const std::vector<LabeledVec>& data, const SoftmaxParams& p);

}  // namespace avf
