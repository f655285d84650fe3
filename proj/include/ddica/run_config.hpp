#pragma once

// Run configuration document for `ddica train` and `ddica bench`.
//
// Every key is optional and unknown keys are rejected:
//
//   {
//     "seed": 0, "data": "", "out": "", "output_dim": 0,
//     "preprocess": {"mode": "none|standardize|pca", "components": 0},
//     "network":    {"hidden_widths": [...], "activation": "tanh", "seed": S, "decoder": false},
//     "train":      {"learning_rate", "beta1", "beta2", "eps", "batch_size", "epochs",
//                    "max_steps", "seed", "reconstruction_weight"},
//     "entropy":    {"alpha", "sigma", "eig_floor", "silverman"},
//     "whitening":  {"iterations_per_pair", "eig_floor", "center", "seed"}
//   }
//
// network.seed and train.seed fall back to the top-level seed.

#include "ddica/io.hpp"
#include "ddica/network.hpp"

#include <optional>
#include <set>
#include <string>

namespace ddica {

struct RunConfig {
  std::uint64_t seed = 0;
  std::string data;
  std::string out;
  Index output_dim = 0;  // 0: preprocess components, else input dimension
  std::string preprocess = "none";
  Index preprocess_components = 0;  // 0: output_dim

  std::vector<Index> hidden_widths = NetworkConfig{}.hidden_widths;
  std::string activation = "tanh";
  std::optional<bool> decoder;
  std::optional<std::uint64_t> network_seed;
  std::optional<std::uint64_t> train_seed;

  TrainConfig train;  // train.seed is resolved through train_config()

  Index resolved_output_dim(Index input_dim) const {
    if (output_dim > 0) return output_dim;
    if (preprocess == "pca" && preprocess_components > 0) return preprocess_components;
    return input_dim;
  }

  Index resolved_components(Index input_dim) const {
    if (preprocess_components > 0) return preprocess_components;
    if (output_dim > 0) return output_dim;
    if (preprocess == "pca") {
      throw ConfigError("config: preprocess.mode 'pca' needs preprocess.components or output_dim");
    }
    return input_dim;
  }

  /// Network shape for raw data with `input_dim` rows.
  NetworkConfig network_config(Index input_dim) const {
    NetworkConfig c;
    c.input_dim = preprocess == "pca" ? resolved_components(input_dim) : input_dim;
    c.output_dim = resolved_output_dim(input_dim);
    c.hidden_widths = hidden_widths;
    c.activation = activation;
    c.seed = network_seed.value_or(seed);
    c.decoder = decoder.value_or(train.reconstruction_weight > 0.0);
    c.validate();
    return c;
  }

  TrainConfig train_config() const {
    TrainConfig t = train;
    t.seed = train_seed.value_or(seed);
    t.validate();
    return t;
  }
};

namespace detail {

/// Reads typed keys from one JSON object and reports any key never read.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  bool read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return false;
    const Json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned()) {
        throw ConfigError(path(key) + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    }
    try {
      out = v.get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
    return true;
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    T value{};
    if (read(key, value)) out = value;
  }

  const Json* section(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown config key '" + path(item.key()) + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace detail

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  detail::StrictObject top(j, "config");
  top.read("seed", c.seed);
  top.read("data", c.data);
  top.read("out", c.out);
  top.read("output_dim", c.output_dim);
  if (c.output_dim < 0) throw ConfigError("config.output_dim must be >= 0");

  if (const Json* s = top.section("preprocess")) {
    detail::StrictObject o(*s, "config.preprocess");
    o.read("mode", c.preprocess);
    o.read("components", c.preprocess_components);
    o.finish();
    if (c.preprocess != "none" && c.preprocess != "standardize" && c.preprocess != "pca") {
      throw ConfigError("config.preprocess.mode must be none, standardize or pca");
    }
    if (c.preprocess_components < 0) throw ConfigError("config.preprocess.components must be >= 0");
  }
  if (const Json* s = top.section("network")) {
    detail::StrictObject o(*s, "config.network");
    o.read("hidden_widths", c.hidden_widths);
    o.read("activation", c.activation);
    o.read("seed", c.network_seed);
    o.read("decoder", c.decoder);
    o.finish();
  }
  if (const Json* s = top.section("train")) {
    detail::StrictObject o(*s, "config.train");
    o.read("learning_rate", c.train.learning_rate);
    o.read("beta1", c.train.beta1);
    o.read("beta2", c.train.beta2);
    o.read("eps", c.train.eps);
    o.read("batch_size", c.train.batch_size);
    o.read("epochs", c.train.epochs);
    o.read("max_steps", c.train.max_steps);
    o.read("seed", c.train_seed);
    o.read("reconstruction_weight", c.train.reconstruction_weight);
    o.finish();
  }
  if (const Json* s = top.section("entropy")) {
    detail::StrictObject o(*s, "config.entropy");
    o.read("alpha", c.train.entropy.alpha);
    o.read("sigma", c.train.entropy.sigma);
    o.read("eig_floor", c.train.entropy.eig_floor);
    o.read("silverman", c.train.entropy.silverman);
    o.finish();
  }
  if (const Json* s = top.section("whitening")) {
    detail::StrictObject o(*s, "config.whitening");
    o.read("iterations_per_pair", c.train.whitening.iterations_per_pair);
    o.read("eig_floor", c.train.whitening.eig_floor);
    o.read("center", c.train.whitening.center);
    o.read("seed", c.train.whitening.seed);
    o.finish();
  }
  top.finish();

  for (Index w : c.hidden_widths) {
    if (w < 1) throw ConfigError("config.network.hidden_widths: zero-width layer");
  }
  if (c.activation != "tanh") throw ConfigError("config.network.activation: only 'tanh' is supported");
  c.train_config();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json(path));
}

/// Fully resolved configuration, as recorded next to training outputs.
inline Json run_config_to_json(const RunConfig& c) {
  const TrainConfig t = c.train_config();
  Json j;
  j["seed"] = c.seed;
  j["data"] = c.data;
  j["out"] = c.out;
  j["output_dim"] = c.output_dim;
  j["preprocess"] = {{"mode", c.preprocess}, {"components", c.preprocess_components}};
  j["network"] = {{"hidden_widths", c.hidden_widths},
                  {"activation", c.activation},
                  {"seed", c.network_seed.value_or(c.seed)},
                  {"decoder", c.decoder.value_or(t.reconstruction_weight > 0.0)}};
  j["train"] = {{"learning_rate", t.learning_rate}, {"beta1", t.beta1},
                {"beta2", t.beta2},                 {"eps", t.eps},
                {"batch_size", t.batch_size},       {"epochs", t.epochs},
                {"max_steps", t.max_steps},         {"seed", t.seed},
                {"reconstruction_weight", t.reconstruction_weight}};
  j["entropy"] = {{"alpha", t.entropy.alpha},
                  {"sigma", t.entropy.sigma},
                  {"eig_floor", t.entropy.eig_floor},
                  {"silverman", t.entropy.silverman}};
  j["whitening"] = {{"iterations_per_pair", t.whitening.iterations_per_pair},
                    {"eig_floor", t.whitening.eig_floor},
                    {"center", t.whitening.center},
                    {"seed", t.whitening.seed}};
  return j;
}

}  // namespace ddica
