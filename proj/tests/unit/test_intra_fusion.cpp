#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "avf/error.hpp"
#include "avf/gradcheck_suite.hpp"
#include "avf/intra_fusion.hpp"
#include "helpers.hpp"

using namespace avf;
using avf::testing::max_abs_diff;
using avf::testing::pick;
using avf::testing::random_vec;
using avf::testing::random_vectors;

namespace {

FeatureSet two_unit_features() { return FeatureSet({Vec{1.0, 0.0}, Vec{0.0, 1.0}}); }

SelfAttnParams self_params(std::initializer_list<double> w) {
  SelfAttnParams p = SelfAttnParams::zeros(w.size());
  std::copy(w.begin(), w.end(), p.w0.values().begin());
  return p;
}

}  // namespace

TEST(SelfAttend, WorkedExample) {
  const SelfAttnOutput out = self_attend(two_unit_features(), self_params({2.0, 0.0}));
  EXPECT_NEAR(out.alpha[0], 0.880797, 5e-7);
  EXPECT_NEAR(out.alpha[1], 0.5, 1e-12);
  EXPECT_NEAR(out.pooled[0], 0.637890, 5e-7);
  EXPECT_NEAR(out.pooled[1], 0.362110, 5e-7);
}

TEST(SelfAttend, ZeroWeightsGiveMean) {
  const SelfAttnOutput out = self_attend(FeatureSet({Vec{2.0, 4.0}, Vec{0.0, 0.0}}), SelfAttnParams::zeros(2));
  EXPECT_DOUBLE_EQ(out.pooled[0], 1.0);
  EXPECT_DOUBLE_EQ(out.pooled[1], 2.0);
}

TEST(SelfAttend, DimMismatch) {
  EXPECT_THROW(self_attend(two_unit_features(), SelfAttnParams::zeros(3)), DimMismatch);
}

TEST(SelfAttend, SaturatedGatesStayFinite) {
  const SelfAttnOutput out = self_attend(FeatureSet({Vec{-1000.0}, Vec{-2000.0}}), self_params({1.0}));
  EXPECT_TRUE(std::isfinite(out.pooled[0]));
}

TEST(RelationAttend, WorkedExample) {
  RelationAttnParams p1 = RelationAttnParams::zeros(2);
  p1.w1(0, 0) = 1.0;
  const RelationAttnOutput out = relation_attend(two_unit_features(), self_params({2.0, 0.0}), p1);
  EXPECT_NEAR(out.beta[0], 0.731059, 5e-7);
  EXPECT_NEAR(out.beta[1], 0.5, 1e-12);
  const double expected[] = {0.720331, 0.279669, 0.637890, 0.362110};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.pooled[i], expected[i], 5e-7);
}

TEST(TransformerAttend, WorkedExample) {
  TransformerAttnParams p = TransformerAttnParams::zeros(2, 1);
  p.w2(0, 0) = 1.0;
  p.w2(0, 1) = 1.0;
  p.u[0] = 1.0;
  const TransformerAttnOutput out = transformer_attend(FeatureSet({Vec{1.0, 0.0}, Vec{0.0, 0.0}}), p);
  EXPECT_NEAR(std::exp(out.log_gamma[0]), 2.141688, 5e-7);
  EXPECT_NEAR(std::exp(out.log_gamma[1]), 1.0, 1e-12);
  EXPECT_NEAR(out.pooled[0], 0.681700, 5e-7);
  EXPECT_EQ(out.pooled[1], 0.0);
}

TEST(TransformerAttend, LargeScoresDoNotOverflow) {
  TransformerAttnParams p = TransformerAttnParams::zeros(1, 1);
  p.w2(0, 0) = 1.0;
  p.u[0] = 800.0;
  const TransformerAttnOutput out = transformer_attend(FeatureSet({Vec{5.0}, Vec{-5.0}}), p);
  EXPECT_TRUE(std::isfinite(out.pooled[0]));
  EXPECT_NEAR(out.pooled[0], 5.0, 1e-9);
}

TEST(IntraLayers, BackwardWithoutForwardThrows) {
  SelfAttention s(SelfAttnParams::zeros(2));
  EXPECT_THROW(s.backward(Vec{1.0, 1.0}), MissingForwardCache);
  RelationAttention r(SelfAttnParams::zeros(2), RelationAttnParams::zeros(2));
  EXPECT_THROW(r.backward(Vec(4)), MissingForwardCache);
  TransformerAttention t(TransformerAttnParams::zeros(2, 3));
  EXPECT_THROW(t.backward(Vec(2)), MissingForwardCache);
}

TEST(IntraLayers, LayerMatchesFreeFunction) {
  Rng rng(11);
  const FeatureSet fs(random_vectors(5, 4, rng));
  SelfAttnParams p0 = SelfAttnParams::init(4, rng);
  RelationAttnParams p1 = RelationAttnParams::init(4, rng);
  TransformerAttnParams p2 = TransformerAttnParams::init(4, 3, rng);
  SelfAttention s(p0);
  RelationAttention r(p0, p1);
  TransformerAttention t(p2);
  EXPECT_EQ(s.forward(fs).pooled, self_attend(fs, p0).pooled);
  EXPECT_EQ(r.forward(fs).pooled, relation_attend(fs, p0, p1).pooled);
  EXPECT_EQ(t.forward(fs).pooled, transformer_attend(fs, p2).pooled);
}

// Property tests over random instances.

class IntraProperty : public ::testing::Test {
 protected:
  static constexpr int kInstances = 200;

  struct Instance {
    std::vector<Vec> features;
    SelfAttnParams p0;
    RelationAttnParams p1;
    TransformerAttnParams p2;
  };

  static Instance make(Rng& rng, std::size_t n) {
    const std::size_t d = pick(rng, 1, 8);
    Instance in{random_vectors(n, d, rng), SelfAttnParams::zeros(d), RelationAttnParams::zeros(d),
                TransformerAttnParams::zeros(d, pick(rng, 1, 5))};
    for (double& w : in.p0.w0.values()) w = rng.normal();
    for (double& w : in.p1.w1.values()) w = rng.normal();
    for (double& w : in.p2.w2.values()) w = rng.normal();
    for (double& w : in.p2.b) w = rng.normal();
    for (double& w : in.p2.u) w = rng.normal();
    return in;
  }
};

TEST_F(IntraProperty, PermutationInvariance) {
  Rng rng(100);
  for (int t = 0; t < kInstances; ++t) {
    Instance in = make(rng, pick(rng, 2, 8));
    std::vector<Vec> shuffled = in.features;
    rng.shuffle(std::span<Vec>(shuffled));
    const FeatureSet a(in.features), b(shuffled);
    EXPECT_LE(max_abs_diff(self_attend(a, in.p0).pooled, self_attend(b, in.p0).pooled), 1e-12);
    EXPECT_LE(max_abs_diff(relation_attend(a, in.p0, in.p1).pooled, relation_attend(b, in.p0, in.p1).pooled),
              1e-12);
    EXPECT_LE(max_abs_diff(transformer_attend(a, in.p2).pooled, transformer_attend(b, in.p2).pooled), 1e-12);
  }
}

TEST_F(IntraProperty, SingleFeatureIsIdentity) {
  Rng rng(101);
  for (int t = 0; t < kInstances; ++t) {
    Instance in = make(rng, 1);
    const FeatureSet fs(in.features);
    const Vec& f = in.features[0];
    EXPECT_EQ(self_attend(fs, in.p0).pooled, f);
    EXPECT_EQ(transformer_attend(fs, in.p2).pooled, f);
    EXPECT_EQ(relation_attend(fs, in.p0, in.p1).pooled, concat(f, f));
  }
}

TEST_F(IntraProperty, ConvexHullContainment) {
  Rng rng(102);
  for (int t = 0; t < kInstances; ++t) {
    Instance in = make(rng, pick(rng, 2, 8));
    const FeatureSet fs(in.features);
    const SelfAttnOutput s = self_attend(fs, in.p0);
    const TransformerAttnOutput tr = transformer_attend(fs, in.p2);

    double alpha_sum = 0.0;
    for (double a : s.alpha) {
      EXPECT_GT(a, 0.0);
      alpha_sum += a;
    }
    double w_sum = 0.0;
    for (double w : tr.weights) {
      EXPECT_GE(w, 0.0);
      w_sum += w;
    }
    EXPECT_NEAR(w_sum, 1.0, 1e-12);

    // pooled equals the explicit convex combination and lies in the bounding box.
    for (std::size_t j = 0; j < fs.dim(); ++j) {
      double lo = fs[0][j], hi = fs[0][j], self_combo = 0.0, tr_combo = 0.0;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        lo = std::min(lo, fs[i][j]);
        hi = std::max(hi, fs[i][j]);
        self_combo += s.alpha[i] / alpha_sum * fs[i][j];
        tr_combo += tr.weights[i] * fs[i][j];
      }
      EXPECT_NEAR(s.pooled[j], self_combo, 1e-12);
      EXPECT_NEAR(tr.pooled[j], tr_combo, 1e-12);
      EXPECT_GE(s.pooled[j], lo - 1e-12);
      EXPECT_LE(s.pooled[j], hi + 1e-12);
      EXPECT_GE(tr.pooled[j], lo - 1e-12);
      EXPECT_LE(tr.pooled[j], hi + 1e-12);
    }
  }
}

TEST_F(IntraProperty, RelationTrailingBlockIsSelfPooled) {
  Rng rng(103);
  for (int t = 0; t < kInstances; ++t) {
    Instance in = make(rng, pick(rng, 1, 8));
    const FeatureSet fs(in.features);
    const RelationAttnOutput r = relation_attend(fs, in.p0, in.p1);
    const Vec fs_pooled = self_attend(fs, in.p0).pooled;
    const std::size_t d = fs.dim();
    ASSERT_EQ(r.pooled.dim(), 2 * d);
    for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(r.pooled[d + j], fs_pooled[j]);
  }
}

TEST(IntraGradients, FiniteDifferenceSuite) {
  for (const char* module : {"self", "relation", "transformer"}) {
    const auto r = run_gradcheck(module, 10, 7);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_LT(r[0].max_rel_err, kGradCheckTolerance) << module << " worst " << r[0].worst;
  }
}
