#include "ddica/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ddica;

namespace {

Matrix random_symmetric(Rng& rng, Index n) {
  const Matrix g = rng.normal_matrix(n, n);
  return 0.5 * (g + g.transpose());
}

/// SPD matrix with prescribed eigenvalues via a random orthogonal basis.
Matrix spd_with_spectrum(Rng& rng, const Vector& values) {
  const Index n = values.size();
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(n, n));
  const Matrix q = qr.householderQ();
  return q * values.asDiagonal() * q.transpose();
}

}  // namespace

TEST(SymmetricEigen, DiagonalInput) {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 3, 1, 2;
  const EigenDecomposition e = symmetric_eigen(a);
  EXPECT_DOUBLE_EQ(e.values[0], 3.0);
  EXPECT_DOUBLE_EQ(e.values[1], 2.0);
  EXPECT_DOUBLE_EQ(e.values[2], 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.vectors(0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.vectors(2, 1)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.vectors(1, 2)), 1.0);
}

TEST(SymmetricEigen, TwoByTwoKernel) {
  const double k = std::exp(-0.5);
  Matrix a(2, 2);
  a << 1, k, k, 1;
  const EigenDecomposition e = symmetric_eigen(a);
  EXPECT_NEAR(e.values[0], 1.0 + k, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0 - k, 1e-14);
  EXPECT_NEAR(e.values[0], 1.6065, 1e-4);
  EXPECT_NEAR(e.values[1], 0.3935, 1e-4);
}

TEST(SymmetricEigen, ReconstructsRandom20x20) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_symmetric(rng, 20);
    const EigenDecomposition e = symmetric_eigen(a);
    EXPECT_LE(max_abs(reconstruct(e) - a), 1e-10);
    EXPECT_NEAR(e.values.sum(), a.trace(), 1e-10);
    EXPECT_LE(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(20, 20)), 1e-9);
    for (Index j = 0; j < 20; ++j) {
      const Vector r = a * e.vectors.col(j) - e.values[j] * e.vectors.col(j);
      EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-9 * inf_norm(a));
      if (j > 0) {
        EXPECT_GE(e.values[j - 1], e.values[j]);
      }
    }
  }
}

TEST(SymmetricEigen, Errors) {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(symmetric_eigen(a), SymmetryError);
  EXPECT_THROW(symmetric_eigen(Matrix(2, 3)), DimensionError);
  Rng rng(2);
  EXPECT_THROW(symmetric_eigen(random_symmetric(rng, 12), 0), ConvergenceError);
}

TEST(SymmetricEigen, FastSolverAgreesWithJacobi) {
  Rng rng(3);
  const Matrix a = random_symmetric(rng, 30);
  const EigenDecomposition j = symmetric_eigen(a);
  const EigenDecomposition f = symmetric_eigen_fast(a);
  EXPECT_LE((j.values - f.values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((symmetric_eigenvalues_fast(a) - j.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PowerIteration, DiagonalDominantAxis) {
  Matrix c(2, 2);
  c << 2, 0, 0, 1;
  const EigenDecomposition e = power_iteration_deflate(c, 100);
  EXPECT_NEAR(e.values[0], 2.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 1.0, 1e-12);
}

TEST(PowerIteration, IdentityHasUnitSpectrum) {
  const EigenDecomposition e = power_iteration_deflate(Matrix::Identity(3, 3), 100);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(e.values[j], 1.0, 1e-12);
  EXPECT_LE(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)), 1e-9);
}

TEST(PowerIteration, ZeroMatrixGivesOrthonormalBasis) {
  const EigenDecomposition e = power_iteration_deflate(Matrix::Zero(4, 4), 10);
  for (Index j = 0; j < 4; ++j) EXPECT_EQ(e.values[j], 0.0);
  EXPECT_LE(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(4, 4)), 1e-9);
}

TEST(PowerIteration, MatchesJacobiOnRandomSpd6x6) {
  Rng rng(4);
  Vector values(6);
  values << 6, 5, 4, 3, 2, 1;
  const Matrix c = spd_with_spectrum(rng, values);
  const EigenDecomposition p = power_iteration_deflate(c, 100);
  const EigenDecomposition j = symmetric_eigen(c);
  EXPECT_LE((p.values - j.values).cwiseAbs().maxCoeff(), 1e-6);
  for (Index k = 0; k < 6; ++k) {
    const Vector r = c * p.vectors.col(k) - p.values[k] * p.vectors.col(k);
    EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-6 * inf_norm(c));
  }
}

TEST(PowerIteration, Errors) {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(power_iteration_deflate(a, 10), SymmetryError);
  EXPECT_THROW(power_iteration_deflate(Matrix::Identity(2, 2), 0), ConfigError);
}

TEST(InverseSqrt, DiagonalAndIdentity) {
  Matrix c = Matrix::Zero(2, 2);
  c.diagonal() << 4, 1;
  const Matrix w = inverse_sqrt_from_eigen(symmetric_eigen(c), 1e-8);
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 0.5, 1.0;
  EXPECT_LE(max_abs(w - expected), 1e-15);
  EXPECT_LE(max_abs(inverse_sqrt_from_eigen(symmetric_eigen(Matrix::Identity(3, 3)), 1e-8) -
                    Matrix::Identity(3, 3)),
            1e-15);
}

TEST(InverseSqrt, WhitensRandomSpd) {
  Rng rng(5);
  const Matrix g = rng.normal_matrix(5, 5);
  const Matrix c = g * g.transpose() + 0.1 * Matrix::Identity(5, 5);
  const Matrix w = inverse_sqrt_from_eigen(symmetric_eigen(c), 1e-12);
  EXPECT_LE(max_abs(w * c * w.transpose() - Matrix::Identity(5, 5)), 1e-6);
  EXPECT_LE(asymmetry(w), 1e-12);
  EXPECT_LE(max_abs(w * c - c * w), 1e-8);
}

TEST(InverseSqrt, RejectsNegativeEigenvalues) {
  EigenDecomposition e{Vector::Constant(2, 1.0), Matrix::Identity(2, 2)};
  e.values[1] = -1e-6;
  EXPECT_THROW(inverse_sqrt_from_eigen(e, 1e-8), PsdError);
  e.values[1] = -1e-9;  // within tolerance: floored
  const Matrix w = inverse_sqrt_from_eigen(e, 1e-8);
  EXPECT_NEAR(w(1, 1), 1e4, 1e-6);
}

TEST(RenyiFromSpectrum, SpectralPowerIsContinuousAtFloor) {
  const double f = 1e-6;
  EXPECT_NEAR(spectral_power(f, 0.75, f), spectral_power(f * (1 - 1e-12), 0.75, f), 1e-15);
  EXPECT_EQ(spectral_power(0.0, 0.75, f), 0.0);
  EXPECT_DOUBLE_EQ(spectral_power(0.25, 0.75, f), std::pow(0.25, 0.75));
  EXPECT_DOUBLE_EQ(spectral_power_slope(0.0, 0.75, f), std::pow(f, -0.25));
  EXPECT_DOUBLE_EQ(spectral_power_slope(0.25, 0.75, f), 0.75 * std::pow(0.25, -0.25));
}

TEST(RenyiFromSpectrum, UniformSpectrumGivesLogN) {
  const Vector v = Vector::Constant(8, 1.0 / 8.0);
  EXPECT_NEAR(renyi_from_spectrum(v, 0.75, 1e-12), 3.0, 1e-12);
  Vector point = Vector::Zero(4);
  point[0] = 1.0;
  EXPECT_NEAR(renyi_from_spectrum(point, 0.75, 1e-12), 0.0, 0.0);
}
