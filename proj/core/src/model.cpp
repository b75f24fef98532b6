#include "avf/model.hpp"

#include <cmath>
#include <string>

#include "avf/error.hpp"

namespace avf {
namespace {

std::vector<std::vector<double>> flatten(std::vector<TensorRef> refs) {
  std::vector<std::vector<double>> out;
  out.reserve(refs.size());
  for (const TensorRef& r : refs) out.emplace_back(r.values.begin(), r.values.end());
  return out;
}

std::variant<SelfAttention, RelationAttention, TransformerAttention> make_layer(
    IntraKind kind, std::size_t dim, std::size_t hidden, Rng& rng) {
  switch (kind) {
    case IntraKind::kSelf: return SelfAttention(SelfAttnParams::init(dim, rng));
    case IntraKind::kRelation: {
      SelfAttnParams p0 = SelfAttnParams::init(dim, rng);
      return RelationAttention(std::move(p0), RelationAttnParams::init(dim, rng));
    }
    case IntraKind::kTransformer:
      return TransformerAttention(TransformerAttnParams::init(dim, hidden, rng));
  }
  throw InvalidArgument("unknown intra fusion kind");
}

}  // namespace

ModelSpec model_spec(const ExperimentConfig& cfg) {
  ModelSpec s;
  s.audio_dim = cfg.audio_dim;
  s.visual_dim = enhanced_visual_dim(cfg);
  s.audio_intra = cfg.audio_intra;
  s.visual_intra = cfg.visual_intra;
  s.attention_hidden = cfg.attention_hidden;
  s.cross = cfg.cross;
  s.fbp_k = cfg.fbp_k;
  s.fbp_o = cfg.fbp_o;
  s.fbp_dropout = cfg.fbp_dropout;
  s.classes = cfg.classes;
  return s;
}

std::size_t intra_output_dim(IntraKind kind, std::size_t d) noexcept {
  return kind == IntraKind::kRelation ? 2 * d : d;
}

// ---- IntraBranch ----

IntraBranch::IntraBranch(IntraKind kind, std::size_t dim, std::size_t hidden, Rng& rng)
    : kind_(kind), dim_(dim), layer_(make_layer(kind, dim, hidden, rng)) {}

std::size_t IntraBranch::output_dim() const noexcept { return intra_output_dim(kind_, dim_); }

Vec IntraBranch::pool(const FeatureSet& fs) const {
  return std::visit(
      [&](const auto& layer) -> Vec {
        using L = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<L, SelfAttention>) {
          return self_attend(fs, layer.params()).pooled;
        } else if constexpr (std::is_same_v<L, RelationAttention>) {
          return relation_attend(fs, layer.self_params(), layer.params()).pooled;
        } else {
          return transformer_attend(fs, layer.params()).pooled;
        }
      },
      layer_);
}

Vec IntraBranch::forward(const FeatureSet& fs) {
  return std::visit([&](auto& layer) -> Vec { return layer.forward(fs).pooled; }, layer_);
}

std::vector<std::vector<double>> IntraBranch::backward(const Vec& upstream) const {
  return std::visit(
      [&](const auto& layer) -> std::vector<std::vector<double>> {
        using L = std::decay_t<decltype(layer)>;
        auto g = layer.backward(upstream);
        if constexpr (std::is_same_v<L, RelationAttention>) {
          auto refs = g.self_params.tensors("");
          for (auto& r : g.params.tensors("")) refs.push_back(r);
          return flatten(std::move(refs));
        } else {
          return flatten(g.params.tensors(""));
        }
      },
      layer_);
}

void IntraBranch::collect(const std::string& prefix, std::vector<TensorRef>& out) {
  std::visit(
      [&](auto& layer) {
        using L = std::decay_t<decltype(layer)>;
        std::vector<TensorRef> refs;
        if constexpr (std::is_same_v<L, SelfAttention>) {
          refs = layer.params().tensors(prefix + "self.");
        } else if constexpr (std::is_same_v<L, RelationAttention>) {
          refs = layer.self_params().tensors(prefix + "relation.");
          for (auto& r : layer.params().tensors(prefix + "relation.")) refs.push_back(r);
        } else {
          refs = layer.params().tensors(prefix + "transformer.");
        }
        for (auto& r : refs) out.push_back(std::move(r));
      },
      layer_);
}

// ---- GradientBuffer ----

void GradientBuffer::zero() {
  for (auto& s : slots) std::fill(s.begin(), s.end(), 0.0);
}

std::vector<TensorRef> GradientBuffer::views(const std::vector<TensorRef>& model_tensors) {
  if (model_tensors.size() != slots.size()) throw DimMismatch("gradient buffer / model mismatch");
  std::vector<TensorRef> out;
  out.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    out.push_back({model_tensors[i].name + ".grad", model_tensors[i].rows, model_tensors[i].cols,
                   slots[i]});
  }
  return out;
}

// ---- FusionModel ----

FusionModel::FusionModel(const ModelSpec& spec, Rng& init_rng)
    : spec_(spec),
      audio_(spec.audio_intra, spec.audio_dim, spec.attention_hidden, init_rng),
      visual_(spec.visual_intra, spec.visual_dim, spec.attention_hidden, init_rng),
      classifier_(SoftmaxParams::zeros(spec.classes, 1)) {
  if (spec.cross == CrossKind::kFbp) {
    fbp_.emplace(FBPParams::init(audio_.output_dim(), visual_.output_dim(), spec.fbp_k, spec.fbp_o,
                                 spec.fbp_dropout, init_rng));
  }
  classifier_ = SoftmaxParams::init(spec.classes, fused_dim(), init_rng);
}

std::size_t FusionModel::fused_dim() const noexcept {
  return spec_.cross == CrossKind::kFbp ? spec_.fbp_o : audio_.output_dim() + visual_.output_dim();
}

std::vector<TensorRef> FusionModel::tensors() {
  std::vector<TensorRef> out;
  audio_.collect("audio.", out);
  visual_.collect("visual.", out);
  if (fbp_) {
    for (auto& r : fbp_->params().tensors("fbp.")) out.push_back(std::move(r));
  }
  for (auto& r : classifier_.tensors("classifier.")) out.push_back(std::move(r));
  return out;
}

GradientBuffer FusionModel::make_gradient_buffer() {
  GradientBuffer g;
  for (const TensorRef& t : tensors()) g.slots.emplace_back(t.values.size(), 0.0);
  return g;
}

Vec FusionModel::fuse_pooled(const Vec& a, const Vec& v, const std::vector<double>& mask) const {
  if (!fbp_) return concat_fuse(a, v).values;
  // A scratch layer keeps this path const and free of shared cache state.
  FbpLayer scratch(fbp_->params());
  return scratch.forward_with_mask(a, v, mask).values;
}

Vec FusionModel::fuse(const FeatureSet& audio, const FeatureSet& visual) const {
  return fuse_pooled(audio_.pool(audio), visual_.pool(visual), {});
}

ClassScores FusionModel::predict(const FeatureSet& audio, const FeatureSet& visual) const {
  return softmax_forward(fuse(audio, visual), classifier_);
}

double FusionModel::loss_with_mask(const Sample& s, const std::vector<double>& fbp_mask) const {
  const Vec fused = fuse_pooled(audio_.pool(s.audio), visual_.pool(s.visual), fbp_mask);
  return cross_entropy_backward(fused, s.label, classifier_).loss;
}

double FusionModel::accumulate(const Sample& s, Mode mode, Rng& rng, GradientBuffer& grads) {
  std::vector<double> mask;
  if (fbp_ && mode == Mode::kTrain && spec_.fbp_dropout > 0.0) {
    mask = draw_dropout_mask(spec_.fbp_k * spec_.fbp_o, spec_.fbp_dropout, rng);
  }
  return accumulate_with_mask(s, mask, grads);
}

double FusionModel::accumulate_with_mask(const Sample& s, const std::vector<double>& fbp_mask,
                                         GradientBuffer& grads) {
  const Vec a = audio_.forward(s.audio);
  const Vec v = visual_.forward(s.visual);
  Vec fused = fbp_ ? fbp_->forward_with_mask(a, v, fbp_mask).values : concat_fuse(a, v).values;
  return backprop(s, a, v, fused, grads);
}

double FusionModel::backprop(const Sample& s, const Vec& audio_vec, const Vec& visual_vec,
                             const Vec& fused, GradientBuffer& grads) {
  CrossEntropyGrads ce = cross_entropy_backward(fused, s.label, classifier_);

  Vec grad_a(audio_vec.dim()), grad_v(visual_vec.dim());
  std::vector<std::vector<double>> fusion_grads;
  if (fbp_) {
    FbpGrads fg = fbp_->backward(ce.input);
    grad_a = std::move(fg.a);
    grad_v = std::move(fg.v);
    fusion_grads.emplace_back(fg.u_tilde.values().begin(), fg.u_tilde.values().end());
    fusion_grads.emplace_back(fg.v_tilde.values().begin(), fg.v_tilde.values().end());
  } else {
    for (std::size_t i = 0; i < grad_a.dim(); ++i) grad_a[i] = ce.input[i];
    for (std::size_t i = 0; i < grad_v.dim(); ++i) grad_v[i] = ce.input[grad_a.dim() + i];
  }

  std::size_t slot = 0;
  auto add = [&](const std::vector<double>& g) {
    std::vector<double>& dst = grads.slots.at(slot++);
    if (dst.size() != g.size()) throw DimMismatch("gradient slot size");
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  };
  for (const auto& g : audio_.backward(grad_a)) add(g);
  for (const auto& g : visual_.backward(grad_v)) add(g);
  for (const auto& g : fusion_grads) add(g);
  for (const auto& g : flatten(ce.params.tensors(""))) add(g);
  return ce.loss;
}

void FusionModel::apply_step(const GradientBuffer& grads, double scale) {
  const std::vector<TensorRef> params = tensors();
  if (params.size() != grads.slots.size()) throw DimMismatch("gradient buffer / model mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) axpy(-scale, grads.slots[i], params[i].values);
}

}  // namespace avf
