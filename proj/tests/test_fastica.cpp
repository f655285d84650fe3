#include "ddica/fastica.hpp"
#include "ddica/metrics.hpp"
#include "ddica/whitening.hpp"

#include <gtest/gtest.h>

using namespace ddica;

namespace {

Matrix uniform_sources(std::uint64_t seed, Index q, Index n) {
  Rng rng(seed);
  return rng.uniform_matrix(q, n, -std::sqrt(3.0), std::sqrt(3.0));
}

}  // namespace

TEST(FastIca, IndependentWhitenedInput) {
  const Matrix s = whiten_reference(uniform_sources(1, 2, 2000), {});
  const FastIcaResult r = fastica(s, {});
  EXPECT_TRUE(r.converged);
  const MatchResult m = match_components(r.sources, s);
  EXPECT_GE(m.mean_abs_corr, 0.99);
}

TEST(FastIca, RandomLinearMixtures) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const Matrix s = uniform_sources(seed, 2, 2000);
    const Matrix a = rng.normal_matrix(2, 2);
    FastIcaConfig cfg;
    cfg.seed = seed;
    const FastIcaResult r = fastica(a * s, cfg);
    EXPECT_GE(match_components(r.sources, s).mean_abs_corr, 0.99) << "seed " << seed;
    EXPECT_LT(amari_index(r.unmixing, a), 0.05);
  }
}

TEST(FastIca, UnitCovarianceOutput) {
  Rng rng(2);
  const Matrix x = rng.normal_matrix(3, 3) * uniform_sources(3, 3, 1500);
  const FastIcaResult r = fastica(x, {});
  EXPECT_LE(max_abs(empirical_covariance(r.sources) - Matrix::Identity(3, 3)), 1e-6);
  Matrix xc = x;
  xc.colwise() -= r.mean.col(0);
  EXPECT_LE(max_abs(r.unmixing * xc - r.sources), 1e-9);
}

TEST(FastIca, GaussianSourcesOnlyWhitened) {
  Rng rng(4);
  const Matrix x = rng.normal_matrix(2, 2) * rng.normal_matrix(2, 1000);
  const FastIcaResult r = fastica(x, {});
  EXPECT_LE(max_abs(empirical_covariance(r.sources) - Matrix::Identity(2, 2)), 1e-6);
}

TEST(FastIca, DeterministicGivenSeed) {
  Rng rng(5);
  const Matrix x = rng.normal_matrix(3, 3) * uniform_sources(6, 3, 800);
  FastIcaConfig cfg;
  cfg.seed = 9;
  EXPECT_EQ(fastica(x, cfg).sources, fastica(x, cfg).sources);
}

TEST(FastIca, RowPermutationEquivariance) {
  Rng rng(7);
  const Matrix x = rng.normal_matrix(3, 3) * uniform_sources(8, 3, 1500);
  Matrix xp(3, x.cols());
  xp << x.row(2), x.row(0), x.row(1);
  const MatchResult m = match_components(fastica(xp, {}).sources, fastica(x, {}).sources);
  EXPECT_NEAR(m.mean_abs_corr, 1.0, 1e-9);
}

TEST(FastIca, ReducedComponents) {
  Rng rng(9);
  const Matrix s = uniform_sources(10, 2, 1500);
  const Matrix a = rng.normal_matrix(5, 2);
  Matrix x = a * s + 1e-3 * rng.normal_matrix(5, 1500);
  FastIcaConfig cfg;
  cfg.n_components = 2;
  const FastIcaResult r = fastica(x, cfg);
  EXPECT_EQ(r.sources.rows(), 2);
  EXPECT_EQ(r.unmixing.cols(), 5);
  EXPECT_GE(match_components(r.sources, s).mean_abs_corr, 0.99);
}

TEST(FastIca, Errors) {
  Rng rng(11);
  FastIcaConfig cfg;
  cfg.n_components = 4;
  EXPECT_THROW(fastica(rng.normal_matrix(3, 100), cfg), ConfigError);
  EXPECT_THROW(fastica(rng.normal_matrix(3, 3), {}), RankError);
  Matrix degenerate = rng.normal_matrix(3, 100);
  degenerate.row(2) = degenerate.row(0);
  EXPECT_THROW(fastica(degenerate, {}), RankError);
  cfg = {};
  cfg.nonlinearity = "cube";
  EXPECT_THROW(fastica(rng.normal_matrix(2, 100), cfg), ConfigError);
  cfg = {};
  cfg.max_iters = 1;
  const FastIcaResult r = fastica(rng.normal_matrix(2, 2) * uniform_sources(12, 2, 500), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}
