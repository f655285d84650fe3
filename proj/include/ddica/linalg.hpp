#pragma once

// Dense symmetric eigensolvers and the whitening-matrix construction.
//
// symmetric_eigen is a cyclic Jacobi solver: slow but simple, and exact
// enough to serve as the oracle for everything else in the library.
// symmetric_eigen_fast delegates to Eigen's tridiagonal QR solver and is
// used for the N x N Gram matrices inside the training loop.

#include "ddica/common.hpp"

#include <algorithm>
#include <numeric>

namespace ddica {

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column j pairs with values[j]
};

namespace detail {

/// Reorders eigenpairs into descending eigenvalue order and fixes each
/// eigenvector's sign so that its largest-magnitude entry is positive.
inline EigenDecomposition sorted_descending(const Vector& values, const Matrix& vectors) {
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] > values[b]; });
  EigenDecomposition out{Vector(n), Matrix(vectors.rows(), n)};
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values[j] = values[src];
    Index pivot = 0;
    for (Index i = 1; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, src)) > std::abs(vectors(pivot, src))) pivot = i;
    }
    const double sign = vectors(pivot, src) < 0.0 ? -1.0 : 1.0;
    out.vectors.col(j) = sign * vectors.col(src);
  }
  return out;
}

inline double max_off_diagonal(const Matrix& a) {
  double off = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j) off = std::max(off, std::abs(a(i, j)));
  return off;
}

}  // namespace detail

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the largest off-diagonal magnitude drops to
/// 1e-12 * ||A||_inf. Throws SymmetryError for inputs asymmetric beyond
/// 1e-9 and ConvergenceError if max_sweeps is exhausted.
inline EigenDecomposition symmetric_eigen(const Matrix& input, int max_sweeps = 100) {
  require_symmetric(input, 1e-9, "symmetric_eigen");
  if (!all_finite(input)) throw NumericError("symmetric_eigen: non-finite input");
  const Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double threshold = 1e-12 * inf_norm(a);

  bool converged = false;
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (detail::max_off_diagonal(a) <= threshold) {
      converged = true;
      break;
    }
    if (sweep == max_sweeps) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw ConvergenceError("symmetric_eigen: Jacobi did not converge in " +
                               std::to_string(max_sweeps) + " sweeps",
                           detail::max_off_diagonal(a));
  }
  return detail::sorted_descending(a.diagonal(), v);
}

/// Eigendecomposition via Eigen's SelfAdjointEigenSolver, same conventions as
/// symmetric_eigen. Used where N is large enough that Jacobi is too slow.
inline EigenDecomposition symmetric_eigen_fast(const Matrix& input) {
  require_symmetric(input, 1e-9, "symmetric_eigen_fast");
  if (!all_finite(input)) throw NumericError("symmetric_eigen_fast: non-finite input");
  Eigen::MatrixXd sym = 0.5 * (input + input.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric_eigen_fast: solver failed", asymmetry(input));
  }
  const Index n = sym.rows();
  // Eigen returns ascending order; reverse without the sign pass, which the
  // spectral functions do not need.
  EigenDecomposition out{solver.eigenvalues().reverse(), Matrix(n, n)};
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

inline Vector symmetric_eigenvalues_fast(const Matrix& input) {
  require_symmetric(input, 1e-9, "symmetric_eigenvalues_fast");
  if (!all_finite(input)) throw NumericError("symmetric_eigenvalues_fast: non-finite input");
  Eigen::MatrixXd sym = 0.5 * (input + input.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric_eigenvalues_fast: solver failed", asymmetry(input));
  }
  return solver.eigenvalues().reverse();
}

/// Power iteration with deflation on a symmetric PSD matrix.
///
/// Each pair runs `iters_per_pair` updates u <- Cu / ||Cu||, lambda = ||Cu||,
/// then removes lambda * u * u^T from C. Start vectors are unit-normal draws
/// from Rng(seed), normalized. When the deflated matrix annihilates the start
/// vector the pair is reported with eigenvalue 0 and a unit vector
/// orthogonal to the pairs already found.
inline EigenDecomposition power_iteration_deflate(const Matrix& c, int iters_per_pair,
                                                  std::uint64_t seed = 0) {
  require_symmetric(c, 1e-9, "power_iteration_deflate");
  if (iters_per_pair < 1) throw ConfigError("power_iteration_deflate: iters_per_pair must be >= 1");
  const Index d = c.rows();
  if (d < 1) throw DimensionError("power_iteration_deflate: empty matrix");
  const double zero_tol = 1e-15 * inf_norm(c);

  Rng rng(seed);
  Matrix work = c;
  Vector values(d);
  Matrix vectors(d, d);

  for (Index j = 0; j < d; ++j) {
    Vector start(d);
    for (Index i = 0; i < d; ++i) start[i] = rng.normal();
    start /= start.norm();

    Vector u = start;
    double lambda = 0.0;
    bool collapsed = false;
    for (int it = 0; it < iters_per_pair; ++it) {
      const Vector cu = work * u;
      lambda = cu.norm();
      if (lambda <= zero_tol) {
        collapsed = true;
        break;
      }
      u = cu / lambda;
    }
    if (collapsed) {
      lambda = 0.0;
      // Gram-Schmidt against the basis found so far; fall back to unit axes
      // if the random start happens to lie in their span.
      auto orthogonalize = [&](Vector x) {
        for (Index k = 0; k < j; ++k) x -= vectors.col(k).dot(x) * vectors.col(k);
        for (Index k = 0; k < j; ++k) x -= vectors.col(k).dot(x) * vectors.col(k);
        return x;
      };
      u = orthogonalize(start);
      for (Index axis = 0; u.norm() < 1e-8 && axis < d; ++axis) {
        u = orthogonalize(Vector::Unit(d, axis));
      }
      u /= u.norm();
    }
    values[j] = lambda;
    vectors.col(j) = u;
    work -= lambda * u * u.transpose();
  }
  return detail::sorted_descending(values, vectors);
}

/// Sum_j max(lambda_j, floor)^(-1/2) u_j u_j^T.
inline Matrix inverse_sqrt_from_eigen(const EigenDecomposition& e, double floor) {
  if (!(floor > 0.0)) throw ConfigError("inverse_sqrt_from_eigen: floor must be positive");
  const Index n = e.values.size();
  for (Index j = 0; j < n; ++j) {
    if (e.values[j] < -1e-8) {
      throw PsdError("inverse_sqrt_from_eigen: eigenvalue " + std::to_string(e.values[j]) +
                     " is negative");
    }
  }
  const Index d = e.vectors.rows();
  Matrix w = Matrix::Zero(d, d);
  for (Index j = 0; j < n; ++j) {
    const double scale = 1.0 / std::sqrt(std::max(e.values[j], floor));
    for (Index r = 0; r < d; ++r) {
      for (Index s = r; s < d; ++s) {
        w(r, s) += scale * e.vectors(r, j) * e.vectors(s, j);
      }
    }
  }
  for (Index r = 0; r < d; ++r)
    for (Index s = 0; s < r; ++s) w(r, s) = w(s, r);
  return w;
}

/// Gaussian kernel matrix K(n,m) = exp(-(x_n - x_m)^2 / (2 sigma^2)) over the
/// entries of a vector-shaped matrix. The diagonal is exactly 1.
inline Matrix gaussian_kernel_matrix(const Matrix& x, double sigma) {
  if (x.rows() != 1 && x.cols() != 1) {
    throw DimensionError("gaussian_kernel_matrix: expected a vector, got " + shape_str(x));
  }
  if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel_matrix: sigma must be positive");
  const Index n = x.size();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d = x(i) - x(j);
      const double v = std::exp(-d * d * inv);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

/// Spectral weight of one eigenvalue: lambda^alpha above `floor`, and the
/// line through the origin that meets it at `floor` below. Exactly zero at
/// lambda = 0 with bounded slope floor^(alpha-1) near it.
inline double spectral_power(double lambda, double alpha, double floor) {
  return lambda >= floor ? std::pow(lambda, alpha) : lambda * std::pow(floor, alpha - 1.0);
}

/// d spectral_power / d lambda.
inline double spectral_power_slope(double lambda, double alpha, double floor) {
  return lambda >= floor ? alpha * std::pow(lambda, alpha - 1.0) : std::pow(floor, alpha - 1.0);
}

/// log2(sum_n spectral_power(lambda_n)) / (1 - alpha). Summed smallest-first
/// so the reduction order is fixed.
inline double renyi_from_spectrum(const Vector& descending, double alpha, double floor) {
  double power_sum = 0.0;
  for (Index i = descending.size() - 1; i >= 0; --i) {
    power_sum += spectral_power(descending[i], alpha, floor);
  }
  return std::log2(power_sum) / (1.0 - alpha);
}

/// U diag(values) U^T.
inline Matrix reconstruct(const EigenDecomposition& e) {
  return e.vectors * e.values.asDiagonal() * e.vectors.transpose();
}

}  // namespace ddica
