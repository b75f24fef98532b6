#include "avf/gradcheck_suite.hpp"

#include <cstdio>
#include <functional>
#include <map>

#include "avf/audio_frontend.hpp"
#include "avf/classifier.hpp"
#include "avf/cross_fusion.hpp"
#include "avf/error.hpp"
#include "avf/grad_check.hpp"
#include "avf/intra_fusion.hpp"
#include "avf/model.hpp"

namespace avf {
namespace {

// Balances round-off (about 1e-16 |L| / eps) against truncation (eps^2 f''').
constexpr double kEpsilon = 5e-5;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

Vec random_vec(std::size_t d, Rng& rng, double scale = 1.0) {
  Vec v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

void randomize(std::span<double> values, Rng& rng, double scale) {
  for (double& x : values) x = scale * rng.normal();
}

std::vector<Vec> random_features(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Vec> fs;
  for (std::size_t i = 0; i < n; ++i) fs.push_back(random_vec(d, rng));
  return fs;
}

// Test loss over an output vector: sum c_k y_k + 0.5 |y|^2.
struct ProbeLoss {
  Vec c;
  double value(const Vec& y) const { return dot(c.values(), y.values()) + 0.5 * dot(y.values(), y.values()); }
  Vec grad(const Vec& y) const {
    Vec g = c;
    axpy(1.0, y.values(), g.values());
    return g;
  }
};

void add_feature_refs(std::vector<Vec>& features, std::vector<TensorRef>& out, const char* prefix) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.push_back(tensor_ref(prefix + std::to_string(i), features[i]));
  }
}

GradCheckReport check_self(Rng& rng, std::size_t) {
  const std::size_t n = pick(rng, 2, 6), d = pick(rng, 2, 8);
  std::vector<Vec> features = random_features(n, d, rng);
  SelfAttnParams p = SelfAttnParams::zeros(d);
  randomize(p.w0.values(), rng, 0.7);
  const ProbeLoss probe{random_vec(d, rng)};

  SelfAttention layer(p);
  const Vec y = layer.forward(FeatureSet(features)).pooled;
  SelfAttnGrads g = layer.backward(probe.grad(y));

  std::vector<TensorRef> params = p.tensors("self.");
  std::vector<TensorRef> analytic = g.params.tensors("self.");
  add_feature_refs(features, params, "f");
  add_feature_refs(g.features, analytic, "f");
  return grad_check([&] { return probe.value(self_attend(FeatureSet(features), p).pooled); }, params,
                    analytic, kEpsilon);
}

GradCheckReport check_relation(Rng& rng, std::size_t) {
  const std::size_t n = pick(rng, 2, 6), d = pick(rng, 2, 8);
  std::vector<Vec> features = random_features(n, d, rng);
  SelfAttnParams p0 = SelfAttnParams::zeros(d);
  RelationAttnParams p1 = RelationAttnParams::zeros(d);
  randomize(p0.w0.values(), rng, 0.7);
  randomize(p1.w1.values(), rng, 0.7);
  const ProbeLoss probe{random_vec(2 * d, rng)};

  RelationAttention layer(p0, p1);
  const Vec y = layer.forward(FeatureSet(features)).pooled;
  RelationAttnGrads g = layer.backward(probe.grad(y));

  std::vector<TensorRef> params = p0.tensors("relation.");
  for (auto& r : p1.tensors("relation.")) params.push_back(r);
  std::vector<TensorRef> analytic = g.self_params.tensors("relation.");
  for (auto& r : g.params.tensors("relation.")) analytic.push_back(r);
  add_feature_refs(features, params, "f");
  add_feature_refs(g.features, analytic, "f");
  return grad_check(
      [&] { return probe.value(relation_attend(FeatureSet(features), p0, p1).pooled); }, params,
      analytic, kEpsilon);
}

GradCheckReport check_transformer(Rng& rng, std::size_t) {
  const std::size_t n = pick(rng, 2, 6), d = pick(rng, 2, 8), m = pick(rng, 1, 6);
  std::vector<Vec> features = random_features(n, d, rng);
  TransformerAttnParams p = TransformerAttnParams::zeros(d, m);
  randomize(p.w2.values(), rng, 0.5);
  randomize(p.b.values(), rng, 0.5);
  randomize(p.u.values(), rng, 1.0);
  const ProbeLoss probe{random_vec(d, rng)};

  TransformerAttention layer(p);
  const Vec y = layer.forward(FeatureSet(features)).pooled;
  TransformerAttnGrads g = layer.backward(probe.grad(y));

  std::vector<TensorRef> params = p.tensors("transformer.");
  std::vector<TensorRef> analytic = g.params.tensors("transformer.");
  add_feature_refs(features, params, "f");
  add_feature_refs(g.features, analytic, "f");
  return grad_check([&] { return probe.value(transformer_attend(FeatureSet(features), p).pooled); },
                    params, analytic, kEpsilon);
}

GradCheckReport check_fbp(Rng& rng, std::size_t instance) {
  // A 1-dim input has an exactly zero gradient under l2-normalization (scale
  // invariance), which the relative error cannot resolve; start at 2.
  const std::size_t m = pick(rng, 2, 8), n = pick(rng, 2, 8), k = pick(rng, 1, 4), o = pick(rng, 2, 4);
  FBPParams p = FBPParams::init(m, n, k, o, 0.3, rng);
  Vec a = random_vec(m, rng), v = random_vec(n, rng);
  // Even instances freeze a live dropout mask, odd ones run without dropout.
  const std::vector<double> mask =
      instance % 2 == 0 ? draw_dropout_mask(k * o, p.dropout_p, rng) : std::vector<double>{};
  const ProbeLoss probe{random_vec(o, rng)};

  FbpLayer layer(p);
  const Vec y = layer.forward_with_mask(a, v, mask).values;
  FbpGrads g = layer.backward(probe.grad(y));

  std::vector<TensorRef> params = p.tensors("fbp.");
  params.push_back(tensor_ref("a", a));
  params.push_back(tensor_ref("v", v));
  std::vector<TensorRef> analytic{tensor_ref("fbp.u_tilde", g.u_tilde), tensor_ref("fbp.v_tilde", g.v_tilde),
                                  tensor_ref("a", g.a), tensor_ref("v", g.v)};
  return grad_check(
      [&] {
        FbpLayer probe_layer(p);
        return probe.value(probe_layer.forward_with_mask(a, v, mask).values);
      },
      params, analytic, kEpsilon);
}

GradCheckReport check_classifier(Rng& rng, std::size_t) {
  const std::size_t classes = pick(rng, 2, 7), d = pick(rng, 2, 8);
  SoftmaxParams p = SoftmaxParams::zeros(classes, d);
  randomize(p.weight.values(), rng, 0.7);
  randomize(p.bias.values(), rng, 0.5);
  Vec x = random_vec(d, rng);
  const std::size_t label = static_cast<std::size_t>(rng.below(classes));

  CrossEntropyGrads g = cross_entropy_backward(x, label, p);
  std::vector<TensorRef> params = p.tensors("classifier.");
  params.push_back(tensor_ref("x", x));
  std::vector<TensorRef> analytic = g.params.tensors("classifier.");
  analytic.push_back(tensor_ref("x", g.input));
  return grad_check([&] { return cross_entropy_backward(x, label, p).loss; }, params, analytic,
                    kEpsilon);
}

GradCheckReport check_patch(Rng& rng, std::size_t) {
  const std::size_t frames = pick(rng, 4, 10), bins = pick(rng, 4, 10);
  const std::size_t gh = pick(rng, 1, 3), gw = pick(rng, 1, 3), channels = pick(rng, 1, 5);
  Spectrogram spec{frames, bins, std::vector<double>(frames * bins)};
  randomize(spec.values, rng, 1.0);
  PatchEmbedParams p = PatchEmbedParams::for_input(frames, bins, gh, gw, channels, rng);
  randomize(p.bias.values(), rng, 0.3);
  std::vector<ProbeLoss> probes;
  for (std::size_t i = 0; i < gh * gw; ++i) probes.push_back({random_vec(channels, rng)});

  auto total = [&](const FeatureSet& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += probes[i].value(out[i]);
    return s;
  };

  PatchEmbedLayer layer(p);
  const FeatureSet out = layer.forward(spec);
  std::vector<Vec> upstream;
  for (std::size_t i = 0; i < out.size(); ++i) upstream.push_back(probes[i].grad(out[i]));
  PatchEmbedGrads g = layer.backward(upstream);

  return grad_check([&] { return total(patch_embed(spec, p)); }, p.tensors("patch."),
                    g.params.tensors("patch."), kEpsilon);
}

GradCheckReport check_pipeline(Rng& rng, std::size_t instance) {
  static constexpr IntraKind kKinds[] = {IntraKind::kSelf, IntraKind::kRelation, IntraKind::kTransformer};
  ModelSpec spec;
  spec.audio_dim = pick(rng, 2, 6);
  spec.visual_dim = pick(rng, 2, 6);
  spec.audio_intra = kKinds[instance % 3];
  spec.visual_intra = kKinds[(instance + 1) % 3];
  spec.attention_hidden = pick(rng, 1, 4);
  spec.cross = instance % 4 == 3 ? CrossKind::kConcat : CrossKind::kFbp;
  spec.fbp_k = pick(rng, 1, 3);
  spec.fbp_o = pick(rng, 2, 4);
  spec.fbp_dropout = 0.3;
  spec.classes = pick(rng, 2, 5);

  FusionModel model(spec, rng);
  // Transformer b and u start at zero; move them off that point.
  for (const TensorRef& t : model.tensors()) {
    if (t.name.ends_with(".b") || t.name.ends_with(".u")) randomize(t.values, rng, 0.5);
  }
  const Sample sample{FeatureSet(random_features(pick(rng, 2, 5), spec.audio_dim, rng)),
                      FeatureSet(random_features(pick(rng, 2, 5), spec.visual_dim, rng)),
                      static_cast<std::size_t>(rng.below(spec.classes))};
  const std::vector<double> mask = spec.cross == CrossKind::kFbp
                                       ? draw_dropout_mask(spec.fbp_k * spec.fbp_o, 0.3, rng)
                                       : std::vector<double>{};

  GradientBuffer grads = model.make_gradient_buffer();
  model.accumulate_with_mask(sample, mask, grads);
  const std::vector<TensorRef> params = model.tensors();
  return grad_check([&] { return model.loss_with_mask(sample, mask); }, params, grads.views(params),
                    kEpsilon);
}

using Checker = std::function<GradCheckReport(Rng&, std::size_t)>;

const std::map<std::string, Checker>& checkers() {
  static const std::map<std::string, Checker> table{
      {"self", check_self},         {"relation", check_relation}, {"transformer", check_transformer},
      {"fbp", check_fbp},           {"classifier", check_classifier}, {"patch", check_patch},
      {"pipeline", check_pipeline},
  };
  return table;
}

ModuleGradCheck run_module(const std::string& name, std::size_t instances, std::uint64_t seed) {
  const Checker& check = checkers().at(name);
  ModuleGradCheck result{name, instances, 0, 0.0, {}};
  Rng rng(seed ^ std::hash<std::string>{}(name));
  for (std::size_t i = 0; i < instances; ++i) {
    Rng instance_rng = rng.split();
    const GradCheckReport r = check(instance_rng, i);
    result.entries += r.entries_checked;
    if (r.max_rel_err >= result.max_rel_err) {
      result.max_rel_err = r.max_rel_err;
      char values[80];
      std::snprintf(values, sizeof values, " analytic=%.6e numeric=%.6e", r.worst_analytic, r.worst_numeric);
      result.worst = r.worst_tensor + "[" + std::to_string(r.worst_index) + "] (instance " +
                     std::to_string(i) + ")" + values;
    }
  }
  return result;
}

}  // namespace

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names{"self",       "relation", "transformer", "fbp",
                                              "classifier", "patch",    "pipeline"};
  return names;
}

std::vector<ModuleGradCheck> run_gradcheck(std::string_view module, std::size_t instances,
                                           std::uint64_t seed) {
  std::vector<ModuleGradCheck> out;
  if (module == "all") {
    for (const auto& name : gradcheck_modules()) out.push_back(run_module(name, instances, seed));
    return out;
  }
  const std::string name(module);
  if (!checkers().contains(name)) {
    throw InvalidArgument("unknown gradcheck module '" + name +
                          "' (all|self|relation|transformer|fbp|classifier|patch|pipeline)");
  }
  out.push_back(run_module(name, instances, seed));
  return out;
}

}  // namespace avf
