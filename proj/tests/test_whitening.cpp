#include "ddica/whitening.hpp"

#include <gtest/gtest.h>

using namespace ddica;

namespace {

Matrix whiten_values(const Matrix& z, const WhiteningConfig& cfg = {}) {
  Tape t;
  return whiten_forward(t.leaf(z), cfg).output.value();
}

/// p x N data whose covariance has eigenvalues `spectrum` up to sampling.
Matrix mixed_batch(Rng& rng, const Vector& spectrum, Index n) {
  const Index p = spectrum.size();
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(p, p));
  const Matrix q = qr.householderQ();
  return q * spectrum.cwiseSqrt().asDiagonal() * rng.normal_matrix(p, n);
}

}  // namespace

TEST(Whitening, AlreadyWhiteInputIsUnchanged) {
  Rng rng(1);
  const Matrix z = rng.normal_matrix(3, 200);
  const Matrix white = whiten_reference(z, {});
  EXPECT_LE(max_abs(whiten_values(white) - white), 1e-6);
}

TEST(Whitening, DiagonalCovarianceRescalesRows) {
  // Rows with exact population variances 4 and 1.
  Matrix z(2, 4);
  z << 2, -2, 2, -2,
       1, 1, -1, -1;
  const Matrix out = whiten_values(z);
  Matrix expected(2, 4);
  expected << 1, -1, 1, -1,
              1, 1, -1, -1;
  EXPECT_LE(max_abs(out - expected), 1e-6);
  EXPECT_LE(max_abs(empirical_covariance(out) - Matrix::Identity(2, 2)), 1e-6);
}

TEST(Whitening, Random3x256MatchesReference) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Vector spec(3);
    spec << 5.0, 2.0, 0.5;
    const Matrix z = mixed_batch(rng, spec, 256);
    const Matrix out = whiten_values(z);
    EXPECT_LE(max_abs(empirical_covariance(out) - Matrix::Identity(3, 3)), 1e-3);
    EXPECT_LE(max_abs(out - whiten_reference(z, {})), 1e-5);
  }
}

TEST(Whitening, MatrixIsSymmetricAndCentered) {
  Rng rng(3);
  Tape t;
  const Matrix z = rng.normal_matrix(4, 50) + Matrix::Constant(4, 50, 3.0);
  const WhitenResult r = whiten_forward(t.leaf(z), {});
  EXPECT_LE(asymmetry(r.matrix.value()), 1e-9);
  EXPECT_LE(r.output.value().rowwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(r.floored, 0u);
}

TEST(Whitening, Idempotent) {
  Rng rng(4);
  const Matrix once = whiten_reference(rng.normal_matrix(3, 100) * 2.0, {});
  EXPECT_LE(max_abs(whiten_reference(once, {}) - once), 1e-6);
  EXPECT_LE(max_abs(whiten_values(once) - once), 1e-6);
}

TEST(Whitening, UncenteredVariant) {
  Matrix z(1, 4);
  z << 1, 1, 1, 1;
  WhiteningConfig cfg;
  cfg.center = false;
  // Second moment 1: W = 1 and the input passes through.
  EXPECT_LE(max_abs(whiten_values(z, cfg) - z), 1e-12);
}

TEST(Whitening, CollapsedInputIsFlooredNotFatal) {
  Tape t;
  const WhitenResult r = whiten_forward(t.leaf(Matrix::Zero(2, 10)), {});
  EXPECT_EQ(r.floored, 2u);
  EXPECT_TRUE(all_finite(r.output.value()));
}

TEST(Whitening, Errors) {
  Tape t;
  EXPECT_THROW(whiten_forward(t.leaf(Matrix::Ones(3, 3)), {}), RankError);
  EXPECT_THROW(whiten_reference(Matrix::Ones(3, 2), {}), RankError);
  WhiteningConfig bad;
  bad.iterations_per_pair = 0;
  EXPECT_THROW(whiten_forward(t.leaf(Matrix::Ones(1, 3)), bad), ConfigError);
  bad = {};
  bad.eig_floor = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Whitening, GradientMatchesCentralDifferences) {
  Rng rng(5);
  const Matrix z = rng.normal_matrix(3, 12);
  const Matrix weight = rng.normal_matrix(3, 12);
  auto objective = [&](const Matrix& zz) {
    Tape t;
    return sum(hadamard(tanh_act(whiten_forward(t.leaf(zz), {}).output), t.leaf(weight))).scalar();
  };
  Tape t;
  const Var in = t.leaf(z);
  const Var loss = sum(hadamard(tanh_act(whiten_forward(in, {}).output), t.leaf(weight)));
  const Matrix g = t.backward(loss)[in];
  const double h = 1e-6;
  Matrix zp = z;
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) {
      zp(i, j) = z(i, j) + h;
      const double up = objective(zp);
      zp(i, j) = z(i, j) - h;
      const double down = objective(zp);
      zp(i, j) = z(i, j);
      const double fd = (up - down) / (2 * h);
      EXPECT_LE(std::abs(g(i, j) - fd) / std::max({std::abs(fd), std::abs(g(i, j)), 1e-3}), 1e-3);
    }
  }
}

TEST(Whitening, OrthogonalMixingStillWhite) {
  Rng rng(6);
  const Matrix z = rng.normal_matrix(3, 300);
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(3, 3));
  const Matrix q = qr.householderQ();
  EXPECT_LE(max_abs(empirical_covariance(whiten_values(z)) - Matrix::Identity(3, 3)), 1e-3);
  EXPECT_LE(max_abs(empirical_covariance(whiten_values(q * z)) - Matrix::Identity(3, 3)), 1e-3);
}
