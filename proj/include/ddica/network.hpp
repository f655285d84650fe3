#pragma once

// The unmixing network: a stack of affine layers with tanh hidden
// activations, followed by the differentiable whitening layer. Trained with
// Adam on the total-correlation loss of its whitened outputs.

#include "ddica/common.hpp"
#include "ddica/entropy.hpp"
#include "ddica/io.hpp"
#include "ddica/linalg.hpp"
#include "ddica/tape.hpp"
#include "ddica/whitening.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ddica {

struct NetworkConfig {
  Index input_dim = 0;
  Index output_dim = 0;
  // Eight hidden layers give nine affine layers in total.
  std::vector<Index> hidden_widths = std::vector<Index>(8, 64);
  std::string activation = "tanh";
  std::uint64_t seed = 0;
  // Mirror-image decoder used only by the optional reconstruction term.
  bool decoder = false;

  void validate() const {
    if (input_dim < 1 || output_dim < 1) throw ConfigError("network: dimensions must be >= 1");
    if (output_dim > input_dim) {
      throw ConfigError("network: output_dim (" + std::to_string(output_dim) +
                        ") exceeds input_dim (" + std::to_string(input_dim) + ")");
    }
    for (Index w : hidden_widths) {
      if (w < 1) throw ConfigError("network: zero-width hidden layer");
    }
    if (activation != "tanh") throw ConfigError("network: unsupported activation '" + activation + "'");
  }

  std::size_t layer_count() const { return hidden_widths.size() + 1; }
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Index batch_size = 256;
  int epochs = 1;
  // Hard cap on optimizer steps across all epochs; 0 means no cap.
  std::int64_t max_steps = 0;
  std::uint64_t seed = 0;
  WhiteningConfig whitening;
  EntropyConfig entropy;
  double reconstruction_weight = 0.0;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("train: learning_rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("train: Adam betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw ConfigError("train: eps must be > 0");
    if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (max_steps < 0) throw ConfigError("train: max_steps must be >= 0");
    if (!(reconstruction_weight >= 0.0)) throw ConfigError("train: reconstruction_weight must be >= 0");
    whitening.validate();
    entropy.validate();
  }
};

struct Layer {
  Matrix w;  // out x in
  Matrix b;  // out x 1
};

/// Linear input transform fitted on the training data: x -> P (x - mean).
struct Preprocess {
  std::string mode = "none";  // none | standardize | pca
  Matrix mean;                // d x 1
  Matrix projection;          // k x d

  bool identity() const { return mode == "none"; }

  Matrix apply(const Matrix& x) const {
    if (identity()) return x;
    if (x.rows() != mean.rows()) {
      throw DimensionError("preprocess: expected " + std::to_string(mean.rows()) +
                           " input rows, got " + shape_str(x));
    }
    Matrix centered = x;
    centered.colwise() -= mean.col(0);
    return projection * centered;
  }
};

/// Fits a preprocessing transform on d x N data. `components` applies to
/// pca only and must not exceed d.
inline Preprocess fit_preprocess(const Matrix& x, const std::string& mode, Index components) {
  Preprocess pre;
  pre.mode = mode;
  if (mode == "none") return pre;
  const Index d = x.rows();
  const Index n = x.cols();
  if (n < 2) throw DimensionError("preprocess: need at least 2 samples");
  pre.mean = x.rowwise().mean();
  Matrix centered = x;
  centered.colwise() -= pre.mean.col(0);
  if (mode == "standardize") {
    pre.projection = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
      const double sd = std::sqrt(centered.row(i).squaredNorm() / static_cast<double>(n));
      if (!(sd > 0.0)) throw RankError("preprocess: input row " + std::to_string(i) + " is constant");
      pre.projection(i, i) = 1.0 / sd;
    }
    return pre;
  }
  if (mode == "pca") {
    if (components < 1 || components > d) {
      throw ConfigError("preprocess: pca components must lie in [1, " + std::to_string(d) + "]");
    }
    const Matrix cov = (centered * centered.transpose()) / static_cast<double>(n);
    const EigenDecomposition eig = symmetric_eigen(0.5 * (cov + cov.transpose()));
    if (!(eig.values[components - 1] > 1e-12 * eig.values[0])) {
      throw RankError("preprocess: data has fewer than " + std::to_string(components) +
                      " non-degenerate principal components");
    }
    pre.projection.resize(components, d);
    for (Index k = 0; k < components; ++k) {
      pre.projection.row(k) = eig.vectors.col(k).transpose() / std::sqrt(eig.values[k]);
    }
    return pre;
  }
  throw ConfigError("preprocess: unknown mode '" + mode + "'");
}

struct ModelState {
  NetworkConfig config;
  Preprocess preprocess;
  std::vector<Layer> layers;
  std::vector<Layer> decoder;
  // Adam moments, laid out as layers followed by decoder layers.
  std::vector<Layer> adam_m;
  std::vector<Layer> adam_v;
  std::int64_t step = 0;

  std::vector<Layer> all_parameters() const {
    std::vector<Layer> all = layers;
    all.insert(all.end(), decoder.begin(), decoder.end());
    return all;
  }
};

namespace detail {

inline std::vector<Index> layer_widths(const NetworkConfig& cfg) {
  std::vector<Index> widths{cfg.input_dim};
  widths.insert(widths.end(), cfg.hidden_widths.begin(), cfg.hidden_widths.end());
  widths.push_back(cfg.output_dim);
  return widths;
}

inline std::vector<Layer> glorot_layers(const std::vector<Index>& widths, Rng& rng) {
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Index fan_in = widths[l];
    const Index fan_out = widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layers.push_back(Layer{rng.uniform_matrix(fan_out, fan_in, -bound, bound),
                           Matrix::Zero(fan_out, 1)});
  }
  return layers;
}

inline std::vector<Layer> zeros_like(const std::vector<Layer>& layers) {
  std::vector<Layer> out;
  for (const auto& l : layers) {
    out.push_back(Layer{Matrix::Zero(l.w.rows(), l.w.cols()), Matrix::Zero(l.b.rows(), 1)});
  }
  return out;
}

}  // namespace detail

/// Glorot-uniform weights from Rng(cfg.seed), zero biases, zero Adam state.
inline ModelState init_model(const NetworkConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ModelState m;
  m.config = cfg;
  m.layers = detail::glorot_layers(detail::layer_widths(cfg), rng);
  if (cfg.decoder) {
    std::vector<Index> widths = detail::layer_widths(cfg);
    std::reverse(widths.begin(), widths.end());
    m.decoder = detail::glorot_layers(widths, rng);
  }
  const auto all = m.all_parameters();
  m.adam_m = detail::zeros_like(all);
  m.adam_v = detail::zeros_like(all);
  return m;
}

/// Parameters of a ModelState recorded as leaves on a tape.
struct BoundModel {
  std::vector<Var> w;
  std::vector<Var> b;
  std::vector<Var> decoder_w;
  std::vector<Var> decoder_b;
};

inline BoundModel bind(const ModelState& m, Tape& tape) {
  BoundModel bound;
  for (const auto& l : m.layers) {
    bound.w.push_back(tape.leaf(l.w));
    bound.b.push_back(tape.leaf(l.b));
  }
  for (const auto& l : m.decoder) {
    bound.decoder_w.push_back(tape.leaf(l.w));
    bound.decoder_b.push_back(tape.leaf(l.b));
  }
  return bound;
}

/// Affine stack with tanh on every layer but the last.
inline Var mlp(const std::vector<Var>& w, const std::vector<Var>& b, Var h) {
  for (std::size_t l = 0; l < w.size(); ++l) {
    h = add_column(matmul(w[l], h), b[l]);
    if (l + 1 < w.size()) h = tanh_act(h);
  }
  return h;
}

struct ForwardPass {
  BoundModel params;
  Var input;
  Var pre_whitening;  // p x N network output
  Var sources;        // p x N whitened output
  std::size_t floored = 0;
};

/// Runs x (d x N, one sample per column, already preprocessed) through the
/// network and the whitening layer.
inline ForwardPass forward(const ModelState& m, const Matrix& x, Tape& tape,
                           const WhiteningConfig& whitening) {
  if (m.layers.empty()) throw ConfigError("forward: model has no layers");
  if (x.rows() != m.layers.front().w.cols()) {
    throw DimensionError("forward: expected " + std::to_string(m.layers.front().w.cols()) +
                         " input rows, got " + shape_str(x));
  }
  if (!all_finite(x)) throw NumericError("forward: non-finite input");
  ForwardPass pass;
  pass.params = bind(m, tape);
  pass.input = tape.leaf(x);
  pass.pre_whitening = mlp(pass.params.w, pass.params.b, pass.input);
  const WhitenResult white = whiten_forward(pass.pre_whitening, whitening);
  pass.sources = white.output;
  pass.floored = white.floored;
  return pass;
}

/// Parameter gradients, same layout as ModelState::all_parameters().
using ModelGrads = std::vector<Layer>;

struct LossEvaluation {
  double loss = 0.0;
  double total_correlation = 0.0;
  double reconstruction = 0.0;
  std::size_t floored = 0;
  Matrix sources;
  ModelGrads grads;
};

/// Loss = TC(whitened outputs) + reconstruction_weight * MSE(decoder).
inline LossEvaluation evaluate_loss(const ModelState& m, const Matrix& batch, const TrainConfig& t) {
  if (t.reconstruction_weight > 0.0 && m.decoder.empty()) {
    throw ConfigError("train: reconstruction_weight > 0 requires a model built with decoder=true");
  }
  Tape tape;
  const ForwardPass pass = forward(m, batch, tape, t.whitening);
  const Var tc = total_correlation_loss(pass.sources, t.entropy);
  Var loss = tc;
  LossEvaluation out;
  if (t.reconstruction_weight > 0.0) {
    const Var recon = mlp(pass.params.decoder_w, pass.params.decoder_b, pass.sources);
    const Var diff = sub(recon, pass.input);
    const double count = static_cast<double>(batch.size());
    const Var mse = scale(sum(hadamard(diff, diff)), 1.0 / count);
    out.reconstruction = mse.scalar();
    loss = add(tc, scale(mse, t.reconstruction_weight));
  }
  const Gradients g = tape.backward(loss);
  out.loss = loss.scalar();
  out.total_correlation = tc.scalar();
  out.floored = pass.floored;
  out.sources = pass.sources.value();
  for (std::size_t l = 0; l < pass.params.w.size(); ++l) {
    out.grads.push_back(Layer{g[pass.params.w[l]], g[pass.params.b[l]]});
  }
  for (std::size_t l = 0; l < pass.params.decoder_w.size(); ++l) {
    out.grads.push_back(Layer{g[pass.params.decoder_w[l]], g[pass.params.decoder_b[l]]});
  }
  return out;
}

/// One bias-corrected Adam update. Throws NumericError on non-finite
/// gradients, leaving the model untouched.
inline void adam_step(ModelState& m, const ModelGrads& grads, const TrainConfig& t) {
  const std::size_t n_enc = m.layers.size();
  if (grads.size() != n_enc + m.decoder.size()) {
    throw DimensionError("adam_step: expected " + std::to_string(n_enc + m.decoder.size()) +
                         " gradient layers, got " + std::to_string(grads.size()));
  }
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const Layer& p = l < n_enc ? m.layers[l] : m.decoder[l - n_enc];
    if (grads[l].w.rows() != p.w.rows() || grads[l].w.cols() != p.w.cols() ||
        grads[l].b.rows() != p.b.rows() || grads[l].b.cols() != p.b.cols()) {
      throw DimensionError("adam_step: gradient shape mismatch in layer " + std::to_string(l));
    }
    if (!all_finite(grads[l].w) || !all_finite(grads[l].b)) {
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(l) +
                         " at step " + std::to_string(m.step));
    }
  }
  m.step += 1;
  const double bc1 = 1.0 - std::pow(t.beta1, static_cast<double>(m.step));
  const double bc2 = 1.0 - std::pow(t.beta2, static_cast<double>(m.step));
  auto update = [&](Matrix& param, Matrix& mom1, Matrix& mom2, const Matrix& g) {
    mom1 = t.beta1 * mom1 + (1.0 - t.beta1) * g;
    mom2 = t.beta2 * mom2 + (1.0 - t.beta2) * g.cwiseProduct(g);
    for (Index i = 0; i < param.size(); ++i) {
      const double mhat = mom1(i) / bc1;
      const double vhat = mom2(i) / bc2;
      param(i) -= t.learning_rate * mhat / (std::sqrt(vhat) + t.eps);
    }
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    Layer& p = l < n_enc ? m.layers[l] : m.decoder[l - n_enc];
    update(p.w, m.adam_m[l].w, m.adam_v[l].w, grads[l].w);
    update(p.b, m.adam_m[l].b, m.adam_v[l].b, grads[l].b);
  }
}

struct TrainResult {
  ModelState model;
  std::vector<double> loss_history;
  bool aborted = false;
  std::string diagnostic;
};

using StepCallback = std::function<void(std::int64_t step, const LossEvaluation&)>;

/// Mini-batch training on x (d x N, preprocessed). Each epoch shuffles the
/// columns with a generator seeded from t.seed and walks full batches of
/// t.batch_size; a trailing partial batch is dropped. A non-finite loss or
/// gradient stops training and returns the last good model.
inline TrainResult train(ModelState m, const Matrix& x, const TrainConfig& t,
                         const StepCallback& on_step = {}) {
  t.validate();
  if (x.cols() < t.batch_size) {
    throw ConfigError("train: dataset has " + std::to_string(x.cols()) +
                      " samples, fewer than batch_size " + std::to_string(t.batch_size));
  }
  TrainResult result;
  Rng rng(t.seed);
  std::vector<Index> order(static_cast<std::size_t>(x.cols()));
  for (Index i = 0; i < x.cols(); ++i) order[static_cast<std::size_t>(i)] = i;
  const Index batches = x.cols() / t.batch_size;
  Matrix batch(x.rows(), t.batch_size);
  std::int64_t steps = 0;

  for (int epoch = 0; epoch < t.epochs; ++epoch) {
    rng.shuffle(order);
    for (Index bi = 0; bi < batches; ++bi) {
      if (t.max_steps > 0 && steps >= t.max_steps) break;
      for (Index j = 0; j < t.batch_size; ++j) {
        batch.col(j) = x.col(order[static_cast<std::size_t>(bi * t.batch_size + j)]);
      }
      try {
        const LossEvaluation eval = evaluate_loss(m, batch, t);
        if (!std::isfinite(eval.loss)) throw NumericError("non-finite loss");
        ModelState next = m;
        adam_step(next, eval.grads, t);
        m = std::move(next);
        result.loss_history.push_back(eval.loss);
        ++steps;
        if (on_step) on_step(steps, eval);
      } catch (const NumericError& e) {
        result.aborted = true;
        result.diagnostic = "training aborted at step " + std::to_string(steps + 1) + ": " + e.what();
        result.model = std::move(m);
        return result;
      }
    }
    if (t.max_steps > 0 && steps >= t.max_steps) break;
  }
  result.model = std::move(m);
  return result;
}

/// Separated sources for a full dataset (raw d x N; preprocessing applied
/// here) without recording gradients beyond the forward tape.
inline Matrix separate(const ModelState& m, const Matrix& raw, const WhiteningConfig& whitening) {
  Tape tape;
  return forward(m, m.preprocess.apply(raw), tape, whitening).sources.value();
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace detail {

inline Json layers_to_json(const std::vector<Layer>& layers) {
  Json arr = Json::array();
  for (const auto& l : layers) arr.push_back({{"w", matrix_to_json(l.w)}, {"b", vector_to_json(l.b)}});
  return arr;
}

inline std::vector<Layer> layers_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw IoError(what + ": expected an array of layers");
  std::vector<Layer> out;
  for (const auto& l : j) {
    if (!l.contains("w") || !l.contains("b")) throw IoError(what + ": layer missing w or b");
    out.push_back(Layer{matrix_from_json(l.at("w"), what + ".w"), column_from_json(l.at("b"), what + ".b")});
  }
  return out;
}

}  // namespace detail

inline Json network_config_to_json(const NetworkConfig& c) {
  return {{"input_dim", c.input_dim},     {"output_dim", c.output_dim},
          {"hidden_widths", c.hidden_widths}, {"activation", c.activation},
          {"seed", c.seed},               {"decoder", c.decoder}};
}

inline NetworkConfig network_config_from_json(const Json& j) {
  NetworkConfig c;
  c.input_dim = j.at("input_dim").get<Index>();
  c.output_dim = j.at("output_dim").get<Index>();
  c.hidden_widths = j.at("hidden_widths").get<std::vector<Index>>();
  c.activation = j.at("activation").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.decoder = j.at("decoder").get<bool>();
  return c;
}

/// {"config", "preprocess", "layers", "decoder", "adam": {"m", "v"}, "step"}.
inline Json model_to_json(const ModelState& m) {
  Json pre = {{"mode", m.preprocess.mode}};
  if (!m.preprocess.identity()) {
    pre["mean"] = vector_to_json(m.preprocess.mean);
    pre["projection"] = matrix_to_json(m.preprocess.projection);
  }
  return {{"config", network_config_to_json(m.config)},
          {"preprocess", pre},
          {"layers", detail::layers_to_json(m.layers)},
          {"decoder", detail::layers_to_json(m.decoder)},
          {"adam", {{"m", detail::layers_to_json(m.adam_m)}, {"v", detail::layers_to_json(m.adam_v)}}},
          {"step", m.step}};
}

inline ModelState model_from_json(const Json& j) {
  try {
    ModelState m;
    m.config = network_config_from_json(j.at("config"));
    const Json& pre = j.at("preprocess");
    m.preprocess.mode = pre.at("mode").get<std::string>();
    if (!m.preprocess.identity()) {
      m.preprocess.mean = column_from_json(pre.at("mean"), "preprocess.mean");
      m.preprocess.projection = matrix_from_json(pre.at("projection"), "preprocess.projection");
    }
    m.layers = detail::layers_from_json(j.at("layers"), "layers");
    m.decoder = detail::layers_from_json(j.at("decoder"), "decoder");
    m.adam_m = detail::layers_from_json(j.at("adam").at("m"), "adam.m");
    m.adam_v = detail::layers_from_json(j.at("adam").at("v"), "adam.v");
    m.step = j.at("step").get<std::int64_t>();
    if (m.layers.size() != m.config.layer_count() ||
        m.adam_m.size() != m.layers.size() + m.decoder.size() || m.adam_v.size() != m.adam_m.size()) {
      throw IoError("model: layer counts inconsistent with config");
    }
    return m;
  } catch (const Json::exception& e) {
    throw IoError(std::string("model: malformed document: ") + e.what());
  }
}

}  // namespace ddica
