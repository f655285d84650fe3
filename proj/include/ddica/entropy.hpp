#pragma once

// Matrix-based Renyi alpha-order entropy functional.
//
// A variable observed at N samples is represented by its Gaussian-kernel
// Gram matrix normalized to unit trace. Entropy is a function of that
// matrix's spectrum; joint entropy uses the trace-normalized Hadamard
// product of the marginal Gram matrices. All quantities are in bits.

#include "ddica/common.hpp"
#include "ddica/linalg.hpp"
#include "ddica/tape.hpp"

#include <cmath>
#include <vector>

namespace ddica {

struct EntropyConfig {
  double alpha = 0.75;
  double sigma = 0.1584;
  double eig_floor = 1e-12;
  // Replace sigma by 1.06 * std * N^(-1/5) of each variable's batch.
  bool silverman = false;

  void validate() const {
    if (!(alpha > 0.0) || alpha == 1.0) throw ConfigError("entropy: alpha must be > 0 and != 1");
    if (!(sigma > 0.0)) throw ConfigError("entropy: sigma must be > 0");
    if (!(eig_floor > 0.0)) throw ConfigError("entropy: eig_floor must be > 0");
  }
};

struct GramMatrix {
  Matrix a;  // N x N, unit trace
  Index n = 0;
};

/// Kernel width actually used for a sample vector under `cfg`.
inline double kernel_width(const Matrix& samples, const EntropyConfig& cfg) {
  if (!cfg.silverman) return cfg.sigma;
  const Index n = samples.size();
  const double mean = samples.mean();
  const double var = (samples.array() - mean).square().sum() / static_cast<double>(n - 1);
  const double width = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
  // A constant batch has zero spread; fall back to the fixed width.
  return width > 0.0 ? width : cfg.sigma;
}

/// Normalized Gram matrix A = K / N of a scalar variable (N x 1 or 1 x N).
inline GramMatrix gram_matrix(const Matrix& samples, const EntropyConfig& cfg) {
  cfg.validate();
  if (samples.rows() != 1 && samples.cols() != 1) {
    throw DimensionError("gram_matrix: samples must be a vector, got " + shape_str(samples));
  }
  const Index n = samples.size();
  if (n < 2) throw DimensionError("gram_matrix: need at least 2 samples, got " + std::to_string(n));
  if (!all_finite(samples)) throw NumericError("gram_matrix: non-finite samples");
  Matrix k = gaussian_kernel_matrix(samples, kernel_width(samples, cfg));
  // tr(K) is exactly N for a unit-diagonal kernel.
  return GramMatrix{k / static_cast<double>(n), n};
}

/// Entropy of a unit-trace PSD matrix.
inline double renyi_entropy(const Matrix& a, const EntropyConfig& cfg) {
  cfg.validate();
  const Vector values = symmetric_eigenvalues_fast(a);
  if (values.size() > 0 && values[values.size() - 1] < -1e-8) {
    throw PsdError("renyi_entropy: eigenvalue " + std::to_string(values[values.size() - 1]) +
                   " below -1e-8");
  }
  return renyi_from_spectrum(values, cfg.alpha, cfg.eig_floor);
}

inline double renyi_entropy(const GramMatrix& g, const EntropyConfig& cfg) {
  return renyi_entropy(g.a, cfg);
}

namespace detail {

inline void require_common_n(const std::vector<GramMatrix>& gs, const char* who) {
  for (const auto& g : gs) {
    if (g.a.rows() != gs.front().a.rows() || g.a.cols() != gs.front().a.cols()) {
      throw DimensionError(std::string(who) + ": Gram matrices differ in size (" +
                           shape_str(gs.front().a) + " vs " + shape_str(g.a) + ")");
    }
  }
}

inline Matrix normalized_hadamard(const std::vector<GramMatrix>& gs) {
  Matrix prod = gs.front().a;
  for (std::size_t i = 1; i < gs.size(); ++i) prod = prod.cwiseProduct(gs[i].a);
  return prod / prod.trace();
}

}  // namespace detail

/// H(X_1, ..., X_p) from the trace-normalized Hadamard product.
inline double joint_entropy(const std::vector<GramMatrix>& gs, const EntropyConfig& cfg) {
  if (gs.size() < 2) throw DimensionError("joint_entropy: need at least 2 Gram matrices");
  detail::require_common_n(gs, "joint_entropy");
  return renyi_entropy(detail::normalized_hadamard(gs), cfg);
}

/// sum_i H(X_i) - H(X_1, ..., X_p); zero for a single variable.
inline double total_correlation(const std::vector<GramMatrix>& gs, const EntropyConfig& cfg) {
  if (gs.empty()) throw DimensionError("total_correlation: no Gram matrices");
  detail::require_common_n(gs, "total_correlation");
  if (gs.size() == 1) return 0.0;
  double marginal = 0.0;
  for (const auto& g : gs) marginal += renyi_entropy(g, cfg);
  return marginal - joint_entropy(gs, cfg);
}

/// I(X; Y) = H(X) + H(Y) - H(X, Y). Shares the total-correlation code path.
inline double mutual_information(const GramMatrix& g1, const GramMatrix& g2,
                                 const EntropyConfig& cfg) {
  return total_correlation({g1, g2}, cfg);
}

/// Total correlation of the rows of a p x N source matrix.
inline double total_correlation_of_rows(const Matrix& sources, const EntropyConfig& cfg) {
  std::vector<GramMatrix> gs;
  gs.reserve(static_cast<std::size_t>(sources.rows()));
  for (Index i = 0; i < sources.rows(); ++i) gs.push_back(gram_matrix(sources.row(i), cfg));
  return total_correlation(gs, cfg);
}

/// Differentiable total correlation of p scalar variables, each an N x 1
/// or 1 x N Var on one tape. Returns a 1x1 Var.
inline Var total_correlation_loss(const std::vector<Var>& outputs, const EntropyConfig& cfg) {
  cfg.validate();
  if (outputs.empty()) throw DimensionError("total_correlation_loss: no outputs");
  const Index n = outputs.front().rows * outputs.front().cols;
  if (n < 2) throw DimensionError("total_correlation_loss: need at least 2 samples");

  std::vector<Var> grams;
  grams.reserve(outputs.size());
  for (const Var& v : outputs) {
    if (v.tape != outputs.front().tape) {
      throw Error("total_correlation_loss: outputs live on different tapes");
    }
    if (v.rows * v.cols != n || (v.rows != 1 && v.cols != 1)) {
      throw DimensionError("total_correlation_loss: expected vectors of length " +
                           std::to_string(n) + ", got " + shape_str(v.rows, v.cols));
    }
    // Silverman widths are treated as constants of the batch.
    const double width = kernel_width(v.value(), cfg);
    grams.push_back(scale(gaussian_gram(v, width), 1.0 / static_cast<double>(n)));
  }

  Var marginal = spectral_entropy_node(grams.front(), cfg.alpha, cfg.eig_floor);
  if (grams.size() == 1) return scale(marginal, 0.0);
  for (std::size_t i = 1; i < grams.size(); ++i) {
    marginal = add(marginal, spectral_entropy_node(grams[i], cfg.alpha, cfg.eig_floor));
  }
  Var joint = grams.front();
  for (std::size_t i = 1; i < grams.size(); ++i) joint = hadamard(joint, grams[i]);
  joint = div_scalar(joint, trace(joint));
  return sub(marginal, spectral_entropy_node(joint, cfg.alpha, cfg.eig_floor));
}

/// Convenience overload splitting a p x N Var into its rows.
inline Var total_correlation_loss(const Var& sources, const EntropyConfig& cfg) {
  std::vector<Var> rows;
  for (Index i = 0; i < sources.rows; ++i) rows.push_back(row(sources, i));
  return total_correlation_loss(rows, cfg);
}

}  // namespace ddica
