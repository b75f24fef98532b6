#include "avf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "avf/classifier.hpp"
#include "avf/error.hpp"

namespace avf {
namespace {

// Value-level parse failure; parse_config adds the line and key.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::size_t parse_size(std::string_view v) { return static_cast<std::size_t>(parse_u64(v)); }

double parse_real(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue("expected a real number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw BadValue("expected true/false, got '" + std::string(v) + "'");
}

std::vector<double> parse_list(std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_real(trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw BadValue("expected a comma-separated list");
  return out;
}

IntraKind parse_intra(std::string_view v) {
  if (v == "self") return IntraKind::kSelf;
  if (v == "relation") return IntraKind::kRelation;
  if (v == "transformer") return IntraKind::kTransformer;
  throw BadValue("intra fusion must be self|relation|transformer, got '" + std::string(v) + "'");
}

CrossKind parse_cross(std::string_view v) {
  if (v == "fbp") return CrossKind::kFbp;
  if (v == "concat") return CrossKind::kConcat;
  throw BadValue("cross fusion must be fbp|concat, got '" + std::string(v) + "'");
}

Enhancement parse_enhancement(std::string_view v) {
  if (v == "none") return Enhancement::kNone;
  if (v == "mean") return Enhancement::kMean;
  if (v == "meanstd") return Enhancement::kMeanStd;
  if (v == "normfft") return Enhancement::kNormFft;
  if (v == "ar_mean") return Enhancement::kArMean;
  throw BadValue("enhancement must be none|mean|meanstd|normfft|ar_mean, got '" +
                      std::string(v) + "'");
}

DataMode parse_mode(std::string_view v) {
  if (v == "clustered") return DataMode::kClustered;
  if (v == "interaction") return DataMode::kInteraction;
  throw BadValue("data.mode must be clustered|interaction, got '" + std::string(v) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& key_table() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"seed", [](auto& c, auto v) { c.seed = parse_u64(v); }},
      {"data.mode", [](auto& c, auto v) { c.data_mode = parse_mode(v); }},
      {"data.samples", [](auto& c, auto v) { c.samples = parse_size(v); }},
      {"data.noise", [](auto& c, auto v) { c.noise = parse_real(v); }},
      {"audio.dim", [](auto& c, auto v) { c.audio_dim = parse_size(v); }},
      {"audio.frames", [](auto& c, auto v) { c.audio_frames = parse_size(v); }},
      {"audio.intra", [](auto& c, auto v) { c.audio_intra = parse_intra(v); }},
      {"audio.patch_grid_h", [](auto& c, auto v) { c.audio_patch_grid_h = parse_size(v); }},
      {"audio.patch_grid_w", [](auto& c, auto v) { c.audio_patch_grid_w = parse_size(v); }},
      {"visual.dim", [](auto& c, auto v) { c.visual_dim = parse_size(v); }},
      {"visual.frames", [](auto& c, auto v) { c.visual_frames = parse_size(v); }},
      {"visual.intra", [](auto& c, auto v) { c.visual_intra = parse_intra(v); }},
      {"attention.hidden", [](auto& c, auto v) { c.attention_hidden = parse_size(v); }},
      {"fusion.cross", [](auto& c, auto v) { c.cross = parse_cross(v); }},
      {"fbp.k", [](auto& c, auto v) { c.fbp_k = parse_size(v); }},
      {"fbp.o", [](auto& c, auto v) { c.fbp_o = parse_size(v); }},
      {"fbp.dropout", [](auto& c, auto v) { c.fbp_dropout = parse_real(v); }},
      {"enhancement", [](auto& c, auto v) { c.enhancement = parse_enhancement(v); }},
      {"tta.rotations", [](auto& c, auto v) { c.tta_rotations = parse_list(v); }},
      {"tta.scales", [](auto& c, auto v) { c.tta_scales = parse_list(v); }},
      {"tta.flip", [](auto& c, auto v) { c.tta_flip = parse_bool(v); }},
      {"classifier.classes", [](auto& c, auto v) { c.classes = parse_size(v); }},
      {"classifier.lr", [](auto& c, auto v) { c.lr = parse_real(v); }},
      {"classifier.epochs", [](auto& c, auto v) { c.epochs = parse_size(v); }},
      {"classifier.batch_size", [](auto& c, auto v) { c.batch_size = parse_size(v); }},
      {"classifier.class_weights", [](auto& c, auto v) { c.class_weights = parse_list(v); }},
      {"train.on_all", [](auto& c, auto v) { c.train_on_all = parse_bool(v); }},
  };
  return table;
}

std::string list_text(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

}  // namespace

std::string_view to_string(IntraKind k) noexcept {
  switch (k) {
    case IntraKind::kSelf: return "self";
    case IntraKind::kRelation: return "relation";
    case IntraKind::kTransformer: return "transformer";
  }
  return "?";
}

std::string_view to_string(CrossKind k) noexcept { return k == CrossKind::kFbp ? "fbp" : "concat"; }

std::string_view to_string(Enhancement e) noexcept {
  switch (e) {
    case Enhancement::kNone: return "none";
    case Enhancement::kMean: return "mean";
    case Enhancement::kMeanStd: return "meanstd";
    case Enhancement::kNormFft: return "normfft";
    case Enhancement::kArMean: return "ar_mean";
  }
  return "?";
}

std::string_view to_string(DataMode m) noexcept {
  return m == DataMode::kClustered ? "clustered" : "interaction";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfig("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end()) {
      throw InvalidConfig("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    try {
      it->second(cfg, value);
    } catch (const BadValue& e) {
      throw InvalidConfig("line " + std::to_string(line_no) + " (" + std::string(key) + "): " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* env = std::getenv("AVF_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.seed = parse_u64(env);
    } catch (const BadValue& e) {
      throw InvalidConfig(std::string("AVF_SEED: ") + e.what());
    }
  }
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidConfig(msg);
  };
  require(c.classes >= 2, "classifier.classes must be >= 2");
  require(c.samples >= c.classes, "data.samples must be >= classifier.classes");
  require(c.samples >= 5, "data.samples must be >= 5 for an 80/20 split");
  require(c.noise >= 0.0, "data.noise must be >= 0");
  require(c.audio_dim >= 1 && c.visual_dim >= 1, "modality dims must be >= 1");
  require(c.audio_frames >= 1 && c.visual_frames >= 1, "sequence lengths must be >= 1");
  require(c.audio_patch_grid_h >= 1 && c.audio_patch_grid_w >= 1, "patch grid must be >= 1x1");
  require(c.attention_hidden >= 1, "attention.hidden must be >= 1");
  require(c.fbp_k >= 1 && c.fbp_o >= 1, "fbp.k and fbp.o must be >= 1");
  require(c.fbp_dropout >= 0.0 && c.fbp_dropout < 1.0, "fbp.dropout must lie in [0, 1)");
  require(c.lr >= 0.0, "classifier.lr must be >= 0");
  require(c.batch_size >= 1, "classifier.batch_size must be >= 1");
  require(!c.tta_rotations.empty() && !c.tta_scales.empty(), "tta lists must be non-empty");
  require(c.data_mode != DataMode::kInteraction || c.classes == 2,
          "data.mode=interaction requires classifier.classes=2");
  if (!c.class_weights.empty()) {
    require(c.class_weights.size() == c.classes,
            "classifier.class_weights needs one entry per class");
    for (double w : c.class_weights) require(w > 0.0, "class weights must be > 0");
  }
}

std::vector<double> effective_class_weights(const ExperimentConfig& cfg) {
  if (!cfg.class_weights.empty()) return cfg.class_weights;
  if (cfg.classes == kDefaultClassWeights.size()) return kDefaultClassWeights;
  return std::vector<double>(cfg.classes, 1.0);
}

std::size_t enhanced_visual_dim(const ExperimentConfig& cfg) noexcept {
  switch (cfg.enhancement) {
    case Enhancement::kNone:
    case Enhancement::kMean: return cfg.visual_dim;
    case Enhancement::kMeanStd:
    case Enhancement::kNormFft:
    case Enhancement::kArMean: return 2 * cfg.visual_dim;
  }
  return cfg.visual_dim;
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "seed=" << c.seed << '\n'
      << "data.mode=" << to_string(c.data_mode) << '\n'
      << "data.samples=" << c.samples << '\n'
      << "data.noise=" << c.noise << '\n'
      << "audio.dim=" << c.audio_dim << '\n'
      << "audio.frames=" << c.audio_frames << '\n'
      << "audio.intra=" << to_string(c.audio_intra) << '\n'
      << "audio.patch_grid_h=" << c.audio_patch_grid_h << '\n'
      << "audio.patch_grid_w=" << c.audio_patch_grid_w << '\n'
      << "visual.dim=" << c.visual_dim << '\n'
      << "visual.frames=" << c.visual_frames << '\n'
      << "visual.intra=" << to_string(c.visual_intra) << '\n'
      << "attention.hidden=" << c.attention_hidden << '\n'
      << "fusion.cross=" << to_string(c.cross) << '\n'
      << "fbp.k=" << c.fbp_k << '\n'
      << "fbp.o=" << c.fbp_o << '\n'
      << "fbp.dropout=" << c.fbp_dropout << '\n'
      << "enhancement=" << to_string(c.enhancement) << '\n'
      << "tta.rotations=" << list_text(c.tta_rotations) << '\n'
      << "tta.scales=" << list_text(c.tta_scales) << '\n'
      << "tta.flip=" << (c.tta_flip ? "true" : "false") << '\n'
      << "classifier.classes=" << c.classes << '\n'
      << "classifier.lr=" << c.lr << '\n'
      << "classifier.epochs=" << c.epochs << '\n'
      << "classifier.batch_size=" << c.batch_size << '\n';
  if (!c.class_weights.empty()) out << "classifier.class_weights=" << list_text(c.class_weights) << '\n';
  out << "train.on_all=" << (c.train_on_all ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace avf
