#include "ddica/common.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace ddica;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, NeighbouringSeedsDiffer) {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
}

TEST(Rng, StreamSeedIsBasePlusIndex) {
  EXPECT_EQ(Rng::stream_seed(10, 0), 10u);
  EXPECT_EQ(Rng::stream_seed(10, 7), 17u);
}

TEST(Rng, UniformStaysInRange) {
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-5.0, 5.0);
    ASSERT_GE(u, -5.0);
    ASSERT_LT(u, 5.0);
  }
}

TEST(Rng, NormalMomentsWithinSamplingError) {
  Rng r(11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // Standard errors: 1/sqrt(n) for the mean, sqrt(2/n) for the variance.
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng r(5);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) counts[r.below(7)]++;
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n / 7.0));
  EXPECT_THROW(r.below(0), ConfigError);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng r(9);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  r.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(Helpers, NormsAndSymmetry) {
  Matrix m(2, 2);
  m << 1, -3, 2, 0.5;
  EXPECT_DOUBLE_EQ(max_abs(m), 3.0);
  EXPECT_DOUBLE_EQ(inf_norm(m), 4.0);
  EXPECT_DOUBLE_EQ(asymmetry(m), 5.0);
  EXPECT_THROW(require_symmetric(m, 1e-9, "t"), SymmetryError);
  EXPECT_THROW(require_square(Matrix(2, 3), "t"), DimensionError);
  EXPECT_EQ(shape_str(Matrix(2, 3)), "2x3");
}
