#include "avf/intra_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avf/error.hpp"

namespace avf {

FeatureSet::FeatureSet(std::vector<Vec> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw InvalidArgument("FeatureSet requires n >= 1");
  const std::size_t d = vectors_.front().dim();
  for (std::size_t i = 1; i < vectors_.size(); ++i) {
    if (vectors_[i].dim() != d) {
      throw DimMismatch("FeatureSet vector " + std::to_string(i) + " has dim " +
                        std::to_string(vectors_[i].dim()) + ", expected " + std::to_string(d));
    }
  }
}

namespace {

void scaled_uniform(Mat& m, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& x : m.values()) x = rng.uniform(-bound, bound);
}

void require_dim(const FeatureSet& fs, std::size_t d, const char* who) {
  if (fs.dim() != d) {
    throw DimMismatch(std::string(who) + ": features have dim " + std::to_string(fs.dim()) +
                      ", parameters expect " + std::to_string(d));
  }
}

// pooled = sum w_i x_i with w already normalized. Normalizing the weights
// first makes n = 1 reproduce its input bit for bit.
Vec weighted_sum(const std::vector<Vec>& xs, const std::vector<double>& w) {
  Vec out(xs.front().dim());
  for (std::size_t i = 0; i < xs.size(); ++i) axpy(w[i], xs[i].values(), out.values());
  return out;
}

// log(sigmoid(x)) without underflow for large negative x.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// exp(l_i) / sum exp(l_j), max-subtracted.
std::vector<double> normalized_from_logs(const std::vector<double>& logs) {
  const double peak = *std::max_element(logs.begin(), logs.end());
  std::vector<double> w(logs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) total += (w[i] = std::exp(logs[i] - peak));
  for (double& x : w) x /= total;
  return w;
}

// Gradients of the self-attention pool given dL/d(pooled) and an additional
// direct dL/d(score_i) term (used by relation-attention, whose second stage
// also consumes alpha).
SelfAttnGrads self_backward(const FeatureSet& fs, const SelfAttnParams& p,
                            const SelfAttnOutput& out, const Vec& upstream,
                            const std::vector<double>& extra_dscore) {
  const std::size_t n = fs.size();
  const std::size_t d = fs.dim();
  if (upstream.dim() != d) throw DimMismatch("self-attention upstream gradient dim");

  SelfAttnGrads g{SelfAttnParams::zeros(d), {}};
  g.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // d w_j / d s_i = w_j (delta_ij - w_i) (1 - alpha_i), since d log alpha / ds = 1 - alpha.
    double dlog = 0.0;
    for (std::size_t k = 0; k < d; ++k) dlog += upstream[k] * (fs[i][k] - out.pooled[k]);
    double dscore = dlog * out.weights[i] * (1.0 - out.alpha[i]);
    if (!extra_dscore.empty()) dscore += extra_dscore[i];

    Vec gf(d);
    for (std::size_t k = 0; k < d; ++k) {
      gf[k] = out.weights[i] * upstream[k] + dscore * p.w0(k, 0);
      g.params.w0(k, 0) += dscore * fs[i][k];
    }
    g.features.push_back(std::move(gf));
  }
  return g;
}

}  // namespace

// ---- parameter records ----

SelfAttnParams SelfAttnParams::zeros(std::size_t d) { return {Mat(d, 1)}; }

SelfAttnParams SelfAttnParams::init(std::size_t d, Rng& rng) {
  SelfAttnParams p = zeros(d);
  scaled_uniform(p.w0, d, rng);
  return p;
}

std::vector<TensorRef> SelfAttnParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "w0", w0)};
}

RelationAttnParams RelationAttnParams::zeros(std::size_t d) { return {Mat(2 * d, 1)}; }

RelationAttnParams RelationAttnParams::init(std::size_t d, Rng& rng) {
  RelationAttnParams p = zeros(d);
  scaled_uniform(p.w1, 2 * d, rng);
  return p;
}

std::vector<TensorRef> RelationAttnParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "w1", w1)};
}

TransformerAttnParams TransformerAttnParams::zeros(std::size_t d, std::size_t hidden) {
  return {Mat(hidden, d), Vec(hidden), Vec(hidden)};
}

TransformerAttnParams TransformerAttnParams::init(std::size_t d, std::size_t hidden, Rng& rng) {
  TransformerAttnParams p = zeros(d, hidden);
  scaled_uniform(p.w2, d, rng);
  return p;
}

std::vector<TensorRef> TransformerAttnParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "w2", w2), tensor_ref(prefix + "b", b), tensor_ref(prefix + "u", u)};
}

// ---- forward passes ----

SelfAttnOutput self_attend(const FeatureSet& fs, const SelfAttnParams& p) {
  require_dim(fs, p.dim(), "self_attend");
  std::vector<double> alpha(fs.size()), logs(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double s = dot(fs[i].values(), p.w0.values());
    alpha[i] = sigmoid(s);
    logs[i] = log_sigmoid(s);
  }
  std::vector<double> weights = normalized_from_logs(logs);
  Vec pooled = weighted_sum(fs.vectors(), weights);
  return {std::move(pooled), std::move(alpha), std::move(weights)};
}

RelationAttnOutput relation_attend(const FeatureSet& fs, const SelfAttnParams& p0,
                                   const RelationAttnParams& p1) {
  require_dim(fs, p0.dim(), "relation_attend");
  if (p1.w1.rows() != 2 * fs.dim()) {
    throw DimMismatch("relation_attend: w1 has " + std::to_string(p1.w1.rows()) +
                      " rows, expected 2d = " + std::to_string(2 * fs.dim()));
  }
  SelfAttnOutput self = self_attend(fs, p0);
  const std::size_t n = fs.size();
  const std::size_t d = fs.dim();

  std::vector<double> beta(n), logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (std::size_t k = 0; k < d; ++k) t += fs[i][k] * p1.w1(k, 0) + self.pooled[k] * p1.w1(d + k, 0);
    beta[i] = sigmoid(t);
    logs[i] = std::log(self.weights[i]) + log_sigmoid(t);
  }
  std::vector<double> w = normalized_from_logs(logs);

  // Every concatenated term shares the trailing f_s and the weights sum to
  // one, so that block is f_s itself.
  Vec pooled(2 * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) pooled[k] += w[i] * fs[i][k];
  }
  for (std::size_t k = 0; k < d; ++k) pooled[d + k] = self.pooled[k];

  return {std::move(pooled), std::move(self.pooled), std::move(self.alpha), std::move(beta), std::move(w)};
}

namespace {

TransformerAttnOutput transformer_forward(const FeatureSet& fs, const TransformerAttnParams& p,
                                          std::vector<Vec>* hidden_out) {
  require_dim(fs, p.dim(), "transformer_attend");
  if (p.b.dim() != p.hidden() || p.u.dim() != p.hidden()) {
    throw DimMismatch("transformer_attend: b/u dims must equal W2 rows");
  }
  const std::size_t n = fs.size();
  std::vector<double> log_gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec h = matvec(p.w2, fs[i]);
    for (std::size_t j = 0; j < h.dim(); ++j) h[j] = std::tanh(h[j] + p.b[j]);
    log_gamma[i] = dot(p.u.values(), h.values());
    if (hidden_out) hidden_out->push_back(std::move(h));
  }
  std::vector<double> weights = normalized_from_logs(log_gamma);
  Vec pooled = weighted_sum(fs.vectors(), weights);
  return {std::move(pooled), std::move(log_gamma), std::move(weights)};
}

}  // namespace

TransformerAttnOutput transformer_attend(const FeatureSet& fs, const TransformerAttnParams& p) {
  return transformer_forward(fs, p, nullptr);
}

// ---- layers ----

const SelfAttnOutput& SelfAttention::forward(const FeatureSet& fs) {
  cache_.emplace(Cache{fs, self_attend(fs, params_)});
  return cache_->output;
}

SelfAttnGrads SelfAttention::backward(const Vec& upstream) const {
  if (!cache_) throw MissingForwardCache("SelfAttention::backward called before forward");
  return self_backward(cache_->input, params_, cache_->output, upstream, {});
}

const RelationAttnOutput& RelationAttention::forward(const FeatureSet& fs) {
  cache_.emplace(Cache{fs, relation_attend(fs, self_params_, params_)});
  return cache_->output;
}

RelationAttnGrads RelationAttention::backward(const Vec& upstream) const {
  if (!cache_) throw MissingForwardCache("RelationAttention::backward called before forward");
  const FeatureSet& fs = cache_->input;
  const RelationAttnOutput& out = cache_->output;
  const std::size_t n = fs.size();
  const std::size_t d = fs.dim();
  if (upstream.dim() != 2 * d) throw DimMismatch("relation-attention upstream gradient dim");

  RelationAttnGrads g{SelfAttnParams::zeros(d), RelationAttnParams::zeros(d), {}};
  std::vector<double> dself_score(n);
  Vec grad_fs(d);
  for (std::size_t k = 0; k < d; ++k) grad_fs[k] = upstream[d + k];

  g.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Trailing block contributes G_t . (f_s - f_s) = 0.
    double dlog = 0.0;
    for (std::size_t k = 0; k < d; ++k) dlog += upstream[k] * (fs[i][k] - out.pooled[k]);
    dlog *= out.weights[i];
    dself_score[i] = dlog * (1.0 - out.alpha[i]);
    const double dscore = dlog * (1.0 - out.beta[i]);

    Vec gf(d);
    for (std::size_t k = 0; k < d; ++k) {
      gf[k] = out.weights[i] * upstream[k] + dscore * params_.w1(k, 0);
      grad_fs[k] += dscore * params_.w1(d + k, 0);
      g.params.w1(k, 0) += dscore * fs[i][k];
      g.params.w1(d + k, 0) += dscore * out.self_pooled[k];
    }
    g.features.push_back(std::move(gf));
  }

  const SelfAttnOutput self_out = self_attend(fs, self_params_);
  SelfAttnGrads sg = self_backward(fs, self_params_, self_out, grad_fs, dself_score);
  g.self_params = std::move(sg.params);
  for (std::size_t i = 0; i < n; ++i) axpy(1.0, sg.features[i].values(), g.features[i].values());
  return g;
}

const TransformerAttnOutput& TransformerAttention::forward(const FeatureSet& fs) {
  std::vector<Vec> hidden;
  hidden.reserve(fs.size());
  TransformerAttnOutput out = transformer_forward(fs, params_, &hidden);
  cache_.emplace(Cache{fs, std::move(out), std::move(hidden)});
  return cache_->output;
}

TransformerAttnGrads TransformerAttention::backward(const Vec& upstream) const {
  if (!cache_) throw MissingForwardCache("TransformerAttention::backward called before forward");
  const FeatureSet& fs = cache_->input;
  const TransformerAttnOutput& out = cache_->output;
  const std::size_t n = fs.size();
  const std::size_t d = fs.dim();
  const std::size_t m = params_.hidden();
  if (upstream.dim() != d) throw DimMismatch("transformer-attention upstream gradient dim");

  TransformerAttnGrads g{TransformerAttnParams::zeros(d, m), {}};
  g.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = out.weights[i];
    double dscore = 0.0;
    for (std::size_t k = 0; k < d; ++k) dscore += upstream[k] * (fs[i][k] - out.pooled[k]);
    dscore *= w;

    const Vec& h = cache_->hidden[i];
    Vec dpre(m);
    for (std::size_t j = 0; j < m; ++j) {
      g.params.u[j] += dscore * h[j];
      dpre[j] = dscore * params_.u[j] * (1.0 - h[j] * h[j]);
      g.params.b[j] += dpre[j];
    }
    add_outer(g.params.w2, 1.0, dpre, fs[i]);

    Vec gf = matvec_transposed(params_.w2, dpre);
    axpy(w, upstream.values(), gf.values());
    g.features.push_back(std::move(gf));
  }
  return g;
}

}  // namespace avf
