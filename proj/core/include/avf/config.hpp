#pragma once

// Experiment configuration: UTF-8 `key=value` lines, '#' starts a comment,
// dotted keys. Unknown keys and malformed values raise InvalidConfig. The
// full key table lives in README.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avf {

enum class IntraKind { kSelf, kRelation, kTransformer };
enum class CrossKind { kFbp, kConcat };
enum class Enhancement { kNone, kMean, kMeanStd, kNormFft, kArMean };
enum class DataMode { kClustered, kInteraction };

std::string_view to_string(IntraKind k) noexcept;
std::string_view to_string(CrossKind k) noexcept;
std::string_view to_string(Enhancement e) noexcept;
std::string_view to_string(DataMode m) noexcept;

struct ExperimentConfig {
  std::uint64_t seed = 1;

  DataMode data_mode = DataMode::kClustered;
  std::size_t samples = 700;
  double noise = 0.3;

  std::size_t audio_dim = 16;
  std::size_t audio_frames = 6;
  IntraKind audio_intra = IntraKind::kSelf;
  std::size_t audio_patch_grid_h = 4;
  std::size_t audio_patch_grid_w = 5;

  std::size_t visual_dim = 16;
  std::size_t visual_frames = 6;
  IntraKind visual_intra = IntraKind::kSelf;

  std::size_t attention_hidden = 8;

  CrossKind cross = CrossKind::kFbp;
  std::size_t fbp_k = 4;
  std::size_t fbp_o = 64;
  double fbp_dropout = 0.3;

  Enhancement enhancement = Enhancement::kNone;
  std::vector<double> tta_rotations{-2.0, 0.0, 2.0};
  std::vector<double> tta_scales{1.0, 1.03, 1.07};
  bool tta_flip = true;

  std::size_t classes = 7;
  double lr = 0.1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  /// Empty means: kDefaultClassWeights when classes == 7, all ones otherwise.
  std::vector<double> class_weights;

  bool train_on_all = false;
};

/// Parses config text; later keys override earlier ones. Validates the
/// result. Throws InvalidConfig with the offending line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies AVF_SEED from the environment if set.
void apply_env_overrides(ExperimentConfig& cfg);

/// Cross-field checks (class count vs mode, weights length, ...).
void validate(const ExperimentConfig& cfg);

/// Class weights in effect for `cfg`.
std::vector<double> effective_class_weights(const ExperimentConfig& cfg);

/// Dimension of one visual frame after the configured enhancement.
std::size_t enhanced_visual_dim(const ExperimentConfig& cfg) noexcept;

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& cfg);

}  // namespace avf
