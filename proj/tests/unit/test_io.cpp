#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "avf/checkpoint.hpp"
#include "avf/config.hpp"
#include "avf/error.hpp"
#include "avf/feature_io.hpp"
#include "helpers.hpp"

using namespace avf;
using avf::testing::random_vectors;

namespace {

void put_u32(std::vector<unsigned char>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<unsigned char>(v >> (8 * i));
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("avf_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(FeatureFile, RoundTripWithinFloatPrecision) {
  Rng rng(1);
  const FeatureSet fs(random_vectors(7, 5, rng));
  const FeatureSet back = decode_features(encode_features(fs));
  ASSERT_EQ(back.size(), 7u);
  ASSERT_EQ(back.dim(), 5u);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_LE(std::abs(back[i][j] - fs[i][j]), 1.2e-7 * std::abs(fs[i][j]));
  // The 32-bit representation is a fixed point.
  EXPECT_EQ(encode_features(back), encode_features(fs));
}

TEST(FeatureFile, Layout) {
  const auto bytes = encode_features(FeatureSet({Vec{1.0, 2.0}}));
  ASSERT_EQ(bytes.size(), 12u + 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "AVF1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[15], 0x3f);  // 1.0f = 0x3f800000
}

TEST(FeatureFile, Errors) {
  EXPECT_THROW(decode_features({}), CorruptMagic);
  const std::vector<unsigned char> wrong{'A', 'V', 'F', '2', 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_THROW(decode_features(wrong), CorruptMagic);

  auto bytes = encode_features(FeatureSet({Vec{1.0, 2.0}, Vec{3.0, 4.0}}));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_features(truncated), TruncatedFile);
  const std::vector<unsigned char> header_only(bytes.begin(), bytes.begin() + 8);
  EXPECT_THROW(decode_features(header_only), TruncatedFile);
  auto longer = bytes;
  put_u32(longer, 4, 3);
  EXPECT_THROW(decode_features(longer), TruncatedFile);

  auto zero = bytes;
  put_u32(zero, 8, 0);
  EXPECT_THROW(decode_features(zero), DimOverflow);
  auto huge = bytes;
  put_u32(huge, 4, 0xFFFFFFFFu);
  put_u32(huge, 8, 0xFFFFFFFFu);
  EXPECT_THROW(decode_features(huge), DimOverflow);
}

TEST(FeatureFile, DiskRoundTripAndMissingFile) {
  const auto path = temp_path("features.avf");
  const FeatureSet fs({Vec{0.5, -0.25}});
  save_features(path, fs);
  EXPECT_EQ(load_features(path), fs);
  std::filesystem::remove(path);
  EXPECT_THROW(load_features(path), IoError);
}

TEST(Checkpoint, RoundTripAndRestore) {
  Mat w(2, 3, {1, 2, 3, 4, 5, 6});
  Vec b{0.5, -0.5};
  const auto bytes = encode_checkpoint({tensor_ref("w", w), tensor_ref("b", b)});
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "AVFCKPT1");
  const auto loaded = decode_checkpoint(bytes);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].name, "w");
  EXPECT_EQ(loaded[0].rows, 2u);
  EXPECT_EQ(loaded[0].cols, 3u);
  EXPECT_EQ(loaded[1].values, (std::vector<double>{0.5, -0.5}));

  Mat w2(2, 3);
  Vec b2(2);
  restore_tensors(loaded, {tensor_ref("w", w2), tensor_ref("b", b2)});
  EXPECT_EQ(w2, w);
  EXPECT_EQ(b2, b);

  Vec b3(3);
  EXPECT_THROW(restore_tensors(loaded, {tensor_ref("w", w2), tensor_ref("b", b3)}), DimMismatch);
  EXPECT_THROW(restore_tensors(loaded, {tensor_ref("w", w2)}), DimMismatch);
  EXPECT_THROW(restore_tensors(loaded, {tensor_ref("w", w2), tensor_ref("c", b2)}), DimMismatch);
}

TEST(Checkpoint, CorruptInput) {
  Vec b{1.0};
  auto bytes = encode_checkpoint({tensor_ref("b", b)});
  EXPECT_THROW(decode_checkpoint({}), CorruptMagic);
  auto bad = bytes;
  bad[0] = 'x';
  EXPECT_THROW(decode_checkpoint(bad), CorruptMagic);
  bytes.pop_back();
  EXPECT_THROW(decode_checkpoint(bytes), TruncatedFile);
}

TEST(Config, DefaultsAndOverrides) {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "seed = 9\n"
      "\n"
      "audio.intra=relation   # trailing comment\n"
      "visual.intra=transformer\n"
      "fusion.cross=concat\n"
      "enhancement=meanstd\n"
      "tta.rotations=-15,0,15\n"
      "classifier.class_weights=1,2,3,4,5,6,7\n"
      "seed=10\n");
  EXPECT_EQ(cfg.seed, 10u);
  EXPECT_EQ(cfg.audio_intra, IntraKind::kRelation);
  EXPECT_EQ(cfg.visual_intra, IntraKind::kTransformer);
  EXPECT_EQ(cfg.cross, CrossKind::kConcat);
  EXPECT_EQ(cfg.enhancement, Enhancement::kMeanStd);
  EXPECT_EQ(cfg.tta_rotations, (std::vector<double>{-15.0, 0.0, 15.0}));
  EXPECT_EQ(cfg.class_weights.size(), 7u);
  EXPECT_EQ(cfg.fbp_k, 4u);
  EXPECT_EQ(enhanced_visual_dim(cfg), 32u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("fbp.kk=4\n"), InvalidConfig);
  EXPECT_THROW(parse_config("audio.intra=lstm\n"), InvalidConfig);
  EXPECT_THROW(parse_config("fbp.k=four\n"), InvalidConfig);
  EXPECT_THROW(parse_config("fbp.k=-1\n"), InvalidConfig);
  EXPECT_THROW(parse_config("fbp.dropout=1.5\n"), InvalidConfig);
  EXPECT_THROW(parse_config("no equals sign\n"), InvalidConfig);
  EXPECT_THROW(parse_config("data.mode=interaction\n"), InvalidConfig);  // needs classes=2
  EXPECT_THROW(parse_config("classifier.class_weights=1,2\n"), InvalidConfig);
  try {
    parse_config("seed=1\nbogus=2\n");
    FAIL();
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig cfg = parse_config("seed=5\nfbp.dropout=0.125\nenhancement=ar_mean\ntta.flip=false\n");
  EXPECT_EQ(to_text(parse_config(to_text(cfg))), to_text(cfg));
}

TEST(Config, SeedEnvironmentOverride) {
  ExperimentConfig cfg = parse_config("seed=5\n");
  ::setenv("AVF_SEED", "123", 1);
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.seed, 123u);
  ::setenv("AVF_SEED", "abc", 1);
  EXPECT_THROW(apply_env_overrides(cfg), InvalidConfig);
  ::unsetenv("AVF_SEED");
}

TEST(Config, EffectiveClassWeights) {
  ExperimentConfig cfg;
  EXPECT_EQ(effective_class_weights(cfg), std::vector<double>({0.15, 0.097, 0.129, 0.185, 0.138, 0.082, 0.215}));
  cfg.classes = 3;
  EXPECT_EQ(effective_class_weights(cfg), std::vector<double>(3, 1.0));
}
