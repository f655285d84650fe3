#pragma once

// Central finite-difference check of the end-to-end TC loss gradient
// (network -> whitening -> Renyi total correlation) on a small net.

#include "ddica/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace ddica {

struct GradCheckConfig {
  Index input_dim = 3;
  Index output_dim = 3;
  std::vector<Index> hidden_widths{8, 8};
  Index samples = 16;
  double step = 3e-5;
  // Denominator floor for the relative error, so entries whose true value
  // is near zero are judged on absolute error instead.
  double abs_floor = 1e-3;
  EntropyConfig entropy;
  WhiteningConfig whitening;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t parameters = 0;
  std::string worst;  // "layer L w(i,j)" of the worst entry
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Derivative of f at x by Ridders' extrapolation of central differences,
/// starting from step h and shrinking it until the tableau stops improving.
template <typename F>
double ridders_derivative(F&& f, double x, double h) {
  constexpr int kTable = 10;
  constexpr double kShrink = 1.4;
  constexpr double kShrink2 = kShrink * kShrink;
  double a[kTable][kTable];
  double err = std::numeric_limits<double>::max();
  double ans = 0.0;
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  ans = a[0][0];
  for (int i = 1; i < kTable; ++i) {
    h /= kShrink;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        ans = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
  }
  return ans;
}

namespace detail {

inline double tc_loss_value(const ModelState& m, const Matrix& x, const GradCheckConfig& cfg) {
  Tape tape;
  const ForwardPass pass = forward(m, x, tape, cfg.whitening);
  return total_correlation_loss(pass.sources, cfg.entropy).scalar();
}

}  // namespace detail

/// Compares analytic and central-difference gradients for every weight and
/// bias of a randomly initialized net on random normal data.
inline GradCheckResult gradient_check(std::uint64_t seed, const GradCheckConfig& cfg = {}) {
  NetworkConfig nc;
  nc.input_dim = cfg.input_dim;
  nc.output_dim = cfg.output_dim;
  nc.hidden_widths = cfg.hidden_widths;
  nc.seed = seed;
  ModelState m = init_model(nc);
  Rng rng(Rng::stream_seed(seed, 1));
  // Non-zero biases so their gradients are exercised away from the origin.
  for (auto& layer : m.layers) layer.b = 0.1 * rng.normal_matrix(layer.b.rows(), 1);
  const Matrix x = rng.normal_matrix(cfg.input_dim, cfg.samples);

  TrainConfig t;
  t.whitening = cfg.whitening;
  t.entropy = cfg.entropy;
  const LossEvaluation eval = evaluate_loss(m, x, t);

  GradCheckResult out;
  auto probe = [&](Matrix& param, const Matrix& grad, const std::string& label) {
    for (Index i = 0; i < param.rows(); ++i) {
      for (Index j = 0; j < param.cols(); ++j) {
        const double saved = param(i, j);
        const double numeric = ridders_derivative(
            [&](double v) {
              param(i, j) = v;
              return detail::tc_loss_value(m, x, cfg);
            },
            saved, cfg.step);
        param(i, j) = saved;
        const double rel = relative_error(grad(i, j), numeric, cfg.abs_floor);
        out.max_abs_error = std::max(out.max_abs_error, std::abs(grad(i, j) - numeric));
        if (rel > out.max_rel_error || out.worst.empty()) {
          out.max_rel_error = rel;
          out.worst = label + "(" + std::to_string(i) + "," + std::to_string(j) + ") analytic " +
                      format_double(grad(i, j)) + " numeric " + format_double(numeric);
        }
        ++out.parameters;
      }
    }
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    probe(m.layers[l].w, eval.grads[l].w, "layer " + std::to_string(l) + " w");
    probe(m.layers[l].b, eval.grads[l].b, "layer " + std::to_string(l) + " b");
  }
  return out;
}

}  // namespace ddica
