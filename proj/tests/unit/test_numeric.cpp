#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "avf/error.hpp"
#include "avf/grad_check.hpp"
#include "avf/numeric.hpp"
#include "avf/rng.hpp"
#include "helpers.hpp"

using namespace avf;
using avf::testing::random_vec;

TEST(Sigmoid, KnownValues) {
  EXPECT_NEAR(sigmoid(2.0), 0.880797, 5e-7);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(-2.0), 1.0 - 0.880797, 5e-7);
}

TEST(Sigmoid, SaturatesWithoutOverflow) {
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_FALSE(std::isnan(sigmoid(-800.0)));
}

TEST(Vec, ZeroDimensionRejected) {
  EXPECT_THROW(Vec(0), InvalidArgument);
  EXPECT_THROW(Mat(0, 3), InvalidArgument);
}

TEST(Numeric, MatvecAndTranspose) {
  Mat m(2, 3, {1, 2, 3, 4, 5, 6});
  const Vec y = matvec(m, Vec{1, 0, -1});
  EXPECT_EQ(y, (Vec{-2, -2}));
  const Vec z = matvec_transposed(m, Vec{1, 1});
  EXPECT_EQ(z, (Vec{5, 7, 9}));
  EXPECT_THROW(matvec(m, Vec{1, 2}), DimMismatch);
}

TEST(Numeric, RequireFinite) {
  const std::vector<double> ok{1.0, 2.0};
  const std::vector<double> bad{1.0, std::nan("")};
  EXPECT_NO_THROW(require_finite(ok, "x"));
  EXPECT_THROW(require_finite(bad, "x"), NonFiniteValue);
}

TEST(Dft, ConstantInput) {
  const std::vector<double> x{1, 1, 1, 1};
  const ComplexVec X = dft(x);
  EXPECT_NEAR(X.re[0], 4.0, 1e-12);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_NEAR(X.re[k], 0.0, 1e-12);
    EXPECT_NEAR(X.im[k], 0.0, 1e-12);
  }
}

TEST(Dft, Parseval) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = random_vec(8, rng);
    const ComplexVec X = dft(x.values());
    double spec = 0.0;
    for (std::size_t k = 0; k < 8; ++k) spec += X.re[k] * X.re[k] + X.im[k] * X.im[k];
    EXPECT_NEAR(spec, 8.0 * dot(x.values(), x.values()), 1e-9);
  }
}

TEST(Dft, InverseRoundTrip) {
  Rng rng(5);
  const Vec x = random_vec(11, rng);
  const ComplexVec back = idft(dft(x.values()));
  for (std::size_t t = 0; t < 11; ++t) {
    EXPECT_NEAR(back.re[t], x[t], 1e-12);
    EXPECT_NEAR(back.im[t], 0.0, 1e-12);
  }
}

TEST(Fft, MatchesDirectDft) {
  Rng rng(9);
  for (std::size_t n : {1u, 2u, 8u, 64u}) {
    const Vec x = random_vec(n, rng);
    const ComplexVec a = dft(x.values());
    const ComplexVec b = fft_real(x.values(), n);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(a.re[k], b.re[k], 1e-10);
      EXPECT_NEAR(a.im[k], b.im[k], 1e-10);
    }
  }
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<double> re(6, 0.0), im(6, 0.0);
  EXPECT_THROW(fft_inplace(re, im), InvalidArgument);
  EXPECT_EQ(next_power_of_two(640), 1024u);
  EXPECT_TRUE(is_power_of_two(1024));
  EXPECT_FALSE(is_power_of_two(0));
}

TEST(Rng, ReferenceVectors) {
  // Values from tests/oracles/xoshiro_vectors.py.
  const std::array<std::uint64_t, 4> seed0{0x99ec5f36cb75f2b4ULL, 0xbf6e1f784956452aULL,
                                           0x1a5f849d4933e6e0ULL, 0x6aa594f1262d2d2cULL};
  const std::array<std::uint64_t, 4> seed42{0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL,
                                            0xae17533239e499a1ULL, 0xecb8ad4703b360a1ULL};
  const std::array<std::uint64_t, 4> beef{0xc5555444a74d7e83ULL, 0x65c30d37b4b16e38ULL,
                                          0x54f773200a4efa23ULL, 0x429aed75fb958af7ULL};
  Rng a(0), b(42), c(0xDEADBEEF);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.next_u64(), seed0[i]);
    EXPECT_EQ(b.next_u64(), seed42[i]);
    EXPECT_EQ(c.next_u64(), beef[i]);
  }
}

TEST(Rng, UniformAndBelowRanges) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutationAndDeterministic) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Rng r1(77), r2(77);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, SplitStreamsDiffer) {
  Rng master(4);
  Rng s1 = master.split();
  Rng s2 = master.split();
  EXPECT_NE(s1.next_u64(), s2.next_u64());
}

TEST(GradCheck, QuadraticExact) {
  Vec x{1.0, -2.0, 0.5};
  Vec g{2.0, -4.0, 1.0};
  const auto r = grad_check([&] { return dot(x.values(), x.values()); }, {tensor_ref("x", x)},
                            {tensor_ref("x", g)});
  EXPECT_LT(r.max_rel_err, 1e-8);
  EXPECT_EQ(r.entries_checked, 3u);
}

TEST(GradCheck, DetectsWrongGradient) {
  Vec x{1.0, 2.0};
  Vec g{2.0, 0.0};
  const auto r = grad_check([&] { return dot(x.values(), x.values()); }, {tensor_ref("x", x)},
                            {tensor_ref("x", g)});
  EXPECT_GT(r.max_rel_err, 0.5);
  EXPECT_EQ(r.worst_tensor, "x");
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheck, EpsilonOutOfRange) {
  Vec x{1.0};
  Vec g{0.0};
  auto f = [&] { return x[0]; };
  EXPECT_THROW(grad_check(f, {tensor_ref("x", x)}, {tensor_ref("x", g)}, 1e-9), InvalidArgument);
  EXPECT_THROW(grad_check(f, {tensor_ref("x", x)}, {tensor_ref("x", g)}, 1e-2), InvalidArgument);
}

TEST(GradCheck, NonDeterministicLoss) {
  Vec x{1.0};
  Vec g{1.0};
  Rng rng(1);
  EXPECT_THROW(grad_check([&] { return x[0] + rng.uniform(); }, {tensor_ref("x", x)},
                          {tensor_ref("x", g)}),
               NonDeterministicLoss);
}
