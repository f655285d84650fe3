#pragma once

// FastICA baseline: symmetric fixed-point iteration with the logcosh
// contrast (G(u) = log cosh u, g = tanh) on PCA-whitened data.

#include "ddica/common.hpp"
#include "ddica/linalg.hpp"

#include <cstdint>

namespace ddica {

struct FastIcaConfig {
  Index n_components = 0;  // 0 = input dimension
  int max_iters = 500;
  double tol = 1e-6;
  std::string nonlinearity = "logcosh";
  std::uint64_t seed = 0;
};

struct FastIcaResult {
  Matrix sources;     // p x N, unit variance
  Matrix unmixing;    // p x d, applied to row-centered x
  Matrix whitening;   // p x d
  Matrix mean;        // d x 1
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// W <- (W W^T)^(-1/2) W.
inline Matrix symmetric_decorrelation(const Matrix& w) {
  const Matrix wwt = w * w.transpose();
  return inverse_sqrt_from_eigen(symmetric_eigen(0.5 * (wwt + wwt.transpose())), 1e-300) * w;
}

}  // namespace detail

inline FastIcaResult fastica(const Matrix& x, const FastIcaConfig& cfg) {
  const Index d = x.rows();
  const Index n = x.cols();
  const Index p = cfg.n_components == 0 ? d : cfg.n_components;
  if (p < 1 || p > d) {
    throw ConfigError("fastica: n_components must lie in [1, " + std::to_string(d) + "]");
  }
  if (!(cfg.tol > 0.0)) throw ConfigError("fastica: tol must be > 0");
  if (cfg.max_iters < 1) throw ConfigError("fastica: max_iters must be >= 1");
  if (cfg.nonlinearity != "logcosh") {
    throw ConfigError("fastica: unsupported nonlinearity '" + cfg.nonlinearity + "'");
  }
  if (n <= d) {
    throw RankError("fastica: need more samples than dimensions (N=" + std::to_string(n) +
                    ", d=" + std::to_string(d) + ")");
  }
  if (!all_finite(x)) throw NumericError("fastica: non-finite input");

  FastIcaResult out;
  out.mean = x.rowwise().mean();
  Matrix xc = x;
  xc.colwise() -= out.mean.col(0);
  const Matrix cov = (xc * xc.transpose()) / static_cast<double>(n);
  const EigenDecomposition eig = symmetric_eigen(0.5 * (cov + cov.transpose()));
  if (!(eig.values[p - 1] > 1e-12 * std::max(eig.values[0], 0.0))) {
    throw RankError("fastica: input covariance has rank below " + std::to_string(p));
  }
  out.whitening.resize(p, d);
  for (Index k = 0; k < p; ++k) {
    out.whitening.row(k) = eig.vectors.col(k).transpose() / std::sqrt(eig.values[k]);
  }
  const Matrix z = out.whitening * xc;

  Rng rng(cfg.seed);
  Matrix w = detail::symmetric_decorrelation(rng.normal_matrix(p, p));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Matrix g = (w * z).array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).matrix().rowwise().mean();
    Matrix w_new = (g * z.transpose()) * inv_n - g_prime_mean.asDiagonal() * w;
    w_new = detail::symmetric_decorrelation(w_new);
    const double change =
        ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(w_new);
    out.iterations = it;
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.unmixing = w * out.whitening;
  out.sources = w * z;
  return out;
}

}  // namespace ddica
