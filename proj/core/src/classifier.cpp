#include "avf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "avf/error.hpp"

namespace avf {

SoftmaxParams SoftmaxParams::zeros(std::size_t classes, std::size_t input_dim) {
  return {Mat(classes, input_dim), Vec(classes)};
}

SoftmaxParams SoftmaxParams::init(std::size_t classes, std::size_t input_dim, Rng& rng) {
  SoftmaxParams p = zeros(classes, input_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : p.weight.values()) w = rng.uniform(-bound, bound);
  return p;
}

std::vector<TensorRef> SoftmaxParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "weight", weight), tensor_ref(prefix + "bias", bias)};
}

ClassWeights::ClassWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidArgument("class weights must be non-empty");
  for (double w : weights_) {
    if (!(std::isfinite(w) && w > 0.0)) throw InvalidArgument("class weights must be positive");
  }
}

ClassWeights ClassWeights::uniform(std::size_t classes) {
  return ClassWeights(std::vector<double>(classes, 1.0));
}

Vec logits(const Vec& x, const SoftmaxParams& p) {
  if (x.dim() != p.input_dim()) {
    throw DimMismatch("classifier input dim " + std::to_string(x.dim()) + ", expected " +
                      std::to_string(p.input_dim()));
  }
  Vec z = matvec(p.weight, x);
  axpy(1.0, p.bias.values(), z.values());
  return z;
}

Vec softmax(const Vec& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  Vec out(z.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    out[i] = std::exp(z[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

ClassScores softmax_forward(const Vec& x, const SoftmaxParams& p) { return {softmax(logits(x, p))}; }

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ReweightedScores apply_class_weights(const ClassScores& s, const ClassWeights& w) {
  if (s.probs.dim() != w.size()) {
    throw DimMismatch("class weights have " + std::to_string(w.size()) + " entries, scores " +
                      std::to_string(s.probs.dim()));
  }
  Vec out = s.probs;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] *= w.values()[i];
  const std::size_t predicted = argmax(out.values());
  return {std::move(out), predicted};
}

CrossEntropyGrads cross_entropy_backward(const Vec& x, std::size_t label, const SoftmaxParams& p) {
  if (label >= p.classes()) throw InvalidArgument("label out of range");
  const Vec z = logits(x, p);
  Vec probs = softmax(z);
  // log-sum-exp form keeps the loss finite when p_label underflows.
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double zi : z) total += std::exp(zi - peak);
  const double loss = peak + std::log(total) - z[label];

  Vec& dz = probs;
  dz[label] -= 1.0;
  CrossEntropyGrads g{loss, SoftmaxParams::zeros(p.classes(), p.input_dim()),
                      matvec_transposed(p.weight, dz)};
  add_outer(g.params.weight, 1.0, dz, x);
  g.params.bias = dz;
  return g;
}

double mean_cross_entropy(const std::vector<LabeledVec>& data, const SoftmaxParams& p) {
  if (data.empty()) throw EmptyDataset("mean_cross_entropy on empty dataset");
  double total = 0.0;
  for (const auto& s : data) total += cross_entropy_backward(s.x, s.label, p).loss;
  return total / static_cast<double>(data.size());
}

double accuracy(const std::vector<LabeledVec>& data, const SoftmaxParams& p) {
  if (data.empty()) throw EmptyDataset("accuracy on empty dataset");
  std::size_t hits = 0;
  for (const auto& s : data) {
    if (argmax(logits(s.x, p).values()) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train(const std::vector<LabeledVec>& data, SoftmaxParams p, const TrainOptions& opts,
                  Rng& rng) {
  if (data.empty()) throw EmptyDataset("train called with no samples");
  if (!(opts.lr >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  for (const auto& s : data) {
    if (s.label >= p.classes()) throw InvalidArgument("label out of range");
  }

  const std::size_t batch = opts.batch_size == 0 ? data.size() : std::min(opts.batch_size, data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{p, {}};
  SoftmaxParams& params = result.params;
  auto record_loss = [&](std::size_t epoch) {
    const double loss = mean_cross_entropy(data, params);
    if (!std::isfinite(loss)) {
      throw NumericalDivergence("loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_curve.push_back(loss);
  };

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    record_loss(epoch);
    if (batch < data.size()) rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < data.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, data.size());
      SoftmaxParams grad = SoftmaxParams::zeros(params.classes(), params.input_dim());
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = data[order[i]];
        CrossEntropyGrads g = cross_entropy_backward(s.x, s.label, params);
        axpy(1.0, g.params.weight.values(), grad.weight.values());
        axpy(1.0, g.params.bias.values(), grad.bias.values());
      }
      const double step = opts.lr / static_cast<double>(stop - start);
      axpy(-step, grad.weight.values(), params.weight.values());
      axpy(-step, grad.bias.values(), params.bias.values());
    }
  }
  record_loss(opts.epochs);
  return result;
}

}  // namespace avf
