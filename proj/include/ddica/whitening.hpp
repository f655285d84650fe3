#pragma once

// Differentiable whitening of predicted sources.
//
// whiten_forward records the whole power-iteration-with-deflation schedule
// on the tape, so gradients flow through the eigenvector estimates exactly
// as they were computed. whiten_reference is the same transform built from
// the Jacobi eigensolver, with no tape; tests use it as the oracle.

#include "ddica/common.hpp"
#include "ddica/linalg.hpp"
#include "ddica/tape.hpp"

#include <cstdint>

namespace ddica {

struct WhiteningConfig {
  int iterations_per_pair = 100;
  double eig_floor = 1e-8;
  bool center = true;
  // Seeds the power-iteration start vectors; the same vectors are used on
  // every call.
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations_per_pair < 1) throw ConfigError("whitening: iterations_per_pair must be >= 1");
    if (!(eig_floor > 0.0)) throw ConfigError("whitening: eig_floor must be > 0");
  }
};

struct WhitenResult {
  Var output;            // p x N whitened sources
  Var matrix;            // p x p whitening matrix W
  std::size_t floored = 0;  // eigenvalues raised to eig_floor
};

namespace detail {

inline void require_whitenable(Index p, Index n, const char* who) {
  if (p < 1) throw DimensionError(std::string(who) + ": no components");
  if (n <= p) {
    throw RankError(std::string(who) + ": need more samples than components (N=" +
                    std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }
}

}  // namespace detail

inline WhitenResult whiten_forward(const Var& z, const WhiteningConfig& cfg) {
  cfg.validate();
  const Index p = z.rows;
  const Index n = z.cols;
  detail::require_whitenable(p, n, "whiten_forward");
  Tape& tape = *z.tape;

  const Var zc = cfg.center ? center_rows(z) : z;
  Var work = scale(matmul(zc, transpose(zc)), 1.0 / static_cast<double>(n));

  Rng rng(cfg.seed);
  WhitenResult result;
  Var w;
  for (Index j = 0; j < p; ++j) {
    Matrix start(p, 1);
    for (Index i = 0; i < p; ++i) start(i, 0) = rng.normal();
    start /= start.norm();

    Var u = tape.leaf(std::move(start));
    Var lambda;
    for (int it = 0; it < cfg.iterations_per_pair; ++it) {
      const Var cu = matmul(work, u);
      lambda = norm(cu);
      // A collapsed covariance gives Cu = 0; the clamp keeps u = 0 finite.
      u = div_scalar(cu, clamp_min(lambda, 1e-300));
    }
    if (lambda.scalar() < cfg.eig_floor) ++result.floored;

    const Var outer = matmul(u, transpose(u));
    const Var term = mul_scalar(outer, inv_sqrt_floor(lambda, cfg.eig_floor));
    w = w.valid() ? add(w, term) : term;
    if (j + 1 < p) work = sub(work, mul_scalar(outer, lambda));
  }
  result.matrix = w;
  result.output = matmul(w, zc);
  return result;
}

/// Exact-eigendecomposition whitening matrix U max(D, floor)^(-1/2) U^T of
/// the (optionally centered) p x N batch.
inline Matrix whitening_matrix_reference(const Matrix& z, const WhiteningConfig& cfg) {
  cfg.validate();
  detail::require_whitenable(z.rows(), z.cols(), "whiten_reference");
  Matrix zc = z;
  if (cfg.center) zc.colwise() -= zc.rowwise().mean();
  const Matrix c = (zc * zc.transpose()) / static_cast<double>(z.cols());
  return inverse_sqrt_from_eigen(symmetric_eigen(0.5 * (c + c.transpose())), cfg.eig_floor);
}

inline Matrix whiten_reference(const Matrix& z, const WhiteningConfig& cfg) {
  const Matrix w = whitening_matrix_reference(z, cfg);
  Matrix zc = z;
  if (cfg.center) zc.colwise() -= zc.rowwise().mean();
  return w * zc;
}

/// Row-centered empirical covariance (1/N) Zc Zc^T of a p x N matrix.
inline Matrix empirical_covariance(const Matrix& z) {
  Matrix zc = z;
  zc.colwise() -= zc.rowwise().mean();
  return (zc * zc.transpose()) / static_cast<double>(z.cols());
}

}  // namespace ddica
