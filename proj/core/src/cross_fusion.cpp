#include "avf/cross_fusion.hpp"

#include <cmath>
#include <string>

#include "avf/error.hpp"

namespace avf {
namespace {

struct FbpForward {
  Vec proj_a;
  Vec proj_v;
  Vec pooled;
  FusedVec output;
};

FbpForward run_fbp(const Vec& a, const Vec& v, const FBPParams& p, const std::vector<double>& mask,
                   bool l2_normalize) {
  if (a.dim() != p.audio_dim() || v.dim() != p.visual_dim()) {
    throw DimMismatch("fbp_fuse: inputs (" + std::to_string(a.dim()) + ", " +
                      std::to_string(v.dim()) + ") vs params (" + std::to_string(p.audio_dim()) +
                      ", " + std::to_string(p.visual_dim()) + ")");
  }
  const std::size_t width = p.k * p.o;
  if (!mask.empty() && mask.size() != width) throw DimMismatch("fbp dropout mask size");

  Vec proj_a = matvec_transposed(p.u_tilde, a);
  Vec proj_v = matvec_transposed(p.v_tilde, v);
  Vec pooled(p.o);
  for (std::size_t j = 0; j < width; ++j) {
    double h = proj_a[j] * proj_v[j];
    if (!mask.empty()) h *= mask[j];
    pooled[j / p.k] += h;
  }

  FusedVec out{pooled, false};
  if (l2_normalize) {
    const double norm = norm2(pooled.values());
    if (norm > 0.0) {
      for (double& x : out.values) x /= norm;
      out.norm_applied = true;
    }
  }
  return {std::move(proj_a), std::move(proj_v), std::move(pooled), std::move(out)};
}

}  // namespace

FBPParams FBPParams::zeros(std::size_t m, std::size_t n, std::size_t k, std::size_t o,
                           double dropout_p) {
  if (k == 0 || o == 0) throw InvalidArgument("FBP requires k >= 1 and o >= 1");
  FBPParams p{Mat(m, k * o), Mat(n, k * o), k, o, dropout_p};
  p.validate();
  return p;
}

FBPParams FBPParams::init(std::size_t m, std::size_t n, std::size_t k, std::size_t o,
                          double dropout_p, Rng& rng) {
  FBPParams p = zeros(m, n, k, o, dropout_p);
  const double bu = 1.0 / std::sqrt(static_cast<double>(m));
  const double bv = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& x : p.u_tilde.values()) x = rng.uniform(-bu, bu);
  for (double& x : p.v_tilde.values()) x = rng.uniform(-bv, bv);
  return p;
}

std::vector<TensorRef> FBPParams::tensors(const std::string& prefix) {
  return {tensor_ref(prefix + "u_tilde", u_tilde), tensor_ref(prefix + "v_tilde", v_tilde)};
}

void FBPParams::validate() const {
  if (k == 0 || o == 0) throw InvalidArgument("FBP requires k >= 1 and o >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw InvalidArgument("FBP dropout_p must lie in [0, 1)");
  }
  if (u_tilde.cols() != k * o || v_tilde.cols() != k * o) {
    throw DimMismatch("FBP projection width must equal k*o = " + std::to_string(k * o));
  }
}

std::vector<double> draw_dropout_mask(std::size_t size, double p, Rng& rng) {
  std::vector<double> mask(size, 1.0);
  if (p <= 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
  return mask;
}

FusedVec fbp_fuse(const Vec& a, const Vec& v, const FBPParams& p, Mode mode, Rng& rng) {
  return fbp_fuse(a, v, p, FbpOptions{mode, true}, rng);
}

FusedVec fbp_fuse(const Vec& a, const Vec& v, const FBPParams& p, const FbpOptions& opts,
                  Rng& rng) {
  p.validate();
  std::vector<double> mask;
  if (opts.mode == Mode::kTrain && p.dropout_p > 0.0) {
    mask = draw_dropout_mask(p.k * p.o, p.dropout_p, rng);
  }
  return run_fbp(a, v, p, mask, opts.l2_normalize).output;
}

std::vector<Mat> fbp_expand(const FBPParams& p) {
  p.validate();
  const std::size_t m = p.audio_dim();
  const std::size_t n = p.visual_dim();
  std::vector<Mat> out;
  out.reserve(p.o);
  for (std::size_t i = 0; i < p.o; ++i) {
    Mat w(m, n);
    for (std::size_t j = 0; j < p.k; ++j) {
      const std::size_t col = i * p.k + j;
      add_outer(w, 1.0, p.u_tilde.column(col), p.v_tilde.column(col));
    }
    out.push_back(std::move(w));
  }
  return out;
}

FusedVec concat_fuse(const Vec& a, const Vec& v) { return {concat(a, v), false}; }

const FusedVec& FbpLayer::forward(const Vec& a, const Vec& v, const FbpOptions& opts, Rng& rng) {
  std::vector<double> mask;
  if (opts.mode == Mode::kTrain && params_.dropout_p > 0.0) {
    mask = draw_dropout_mask(params_.k * params_.o, params_.dropout_p, rng);
  }
  return forward_with_mask(a, v, std::move(mask), opts.l2_normalize);
}

const FusedVec& FbpLayer::forward_with_mask(const Vec& a, const Vec& v, std::vector<double> mask,
                                            bool l2_normalize) {
  FbpForward f = run_fbp(a, v, params_, mask, l2_normalize);
  cache_.emplace(Cache{a, v, std::move(f.proj_a), std::move(f.proj_v), std::move(mask),
                       std::move(f.pooled), std::move(f.output), l2_normalize});
  return cache_->output;
}

const std::vector<double>& FbpLayer::last_mask() const {
  if (!cache_) throw MissingForwardCache("FbpLayer::last_mask before forward");
  return cache_->mask;
}

FbpGrads FbpLayer::backward(const Vec& upstream) const {
  if (!cache_) throw MissingForwardCache("FbpLayer::backward called before forward");
  const Cache& c = *cache_;
  const std::size_t o = params_.o;
  const std::size_t k = params_.k;
  if (upstream.dim() != o) throw DimMismatch("FBP upstream gradient dim");

  // Through y = z/|z|: dz = (g - y (y.g)) / |z|.
  Vec grad_pooled = upstream;
  if (c.output.norm_applied) {
    const double norm = norm2(c.pooled.values());
    const Vec& y = c.output.values;
    const double proj = dot(y.values(), upstream.values());
    for (std::size_t i = 0; i < o; ++i) grad_pooled[i] = (upstream[i] - y[i] * proj) / norm;
  } else if (c.l2_normalize) {
    // z == 0 under normalization: the guarded map has no derivative there.
    grad_pooled = Vec(o);
  }

  const std::size_t width = k * o;
  Vec grad_pa(width), grad_pv(width);
  for (std::size_t j = 0; j < width; ++j) {
    double gh = grad_pooled[j / k];
    if (!c.mask.empty()) gh *= c.mask[j];
    grad_pa[j] = gh * c.proj_v[j];
    grad_pv[j] = gh * c.proj_a[j];
  }

  FbpGrads g{Mat(params_.audio_dim(), width), Mat(params_.visual_dim(), width),
             matvec(params_.u_tilde, grad_pa), matvec(params_.v_tilde, grad_pv)};
  add_outer(g.u_tilde, 1.0, c.a, grad_pa);
  add_outer(g.v_tilde, 1.0, c.v, grad_pv);
  return g;
}

}  // namespace avf
