#pragma once

// End-to-end workflows behind the `ddica` subcommands: fitting DDICA and
// FastICA on a dataset directory, scoring against ground truth, and the
// repeated-trial benchmark.

#include "ddica/datagen.hpp"
#include "ddica/fastica.hpp"
#include "ddica/metrics.hpp"
#include "ddica/network.hpp"
#include "ddica/run_config.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ddica {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Separated-source directories
// ---------------------------------------------------------------------------

/// Component maps as square images when the data carries an image shape.
inline void write_component_maps(const fs::path& dir, const Matrix& sources, const Json& meta) {
  if (!meta.contains("image_shape")) return;
  const auto shape = meta.at("image_shape").get<std::vector<Index>>();
  if (shape.size() != 2 || shape[0] * shape[1] != sources.cols()) return;
  for (Index k = 0; k < sources.rows(); ++k) {
    Matrix image(shape[0], shape[1]);
    for (Index r = 0; r < shape[0]; ++r)
      for (Index c = 0; c < shape[1]; ++c) image(r, c) = sources(k, r * shape[1] + c);
    char name[48];
    std::snprintf(name, sizeof(name), "component_%02ld.pgm", static_cast<long>(k));
    write_pgm(dir / name, image);
  }
}

/// Writes estimated sources (p x N in memory) using the same sample axis as
/// the dataset they came from, with a small meta.json recording it.
inline void write_sources(const fs::path& dir, const Matrix& sources, const Json& data_meta) {
  fs::create_directories(dir);
  const std::string axis = data_meta.value("sample_axis", "columns");
  write_csv(dir / "sources.csv", axis == "rows" ? Matrix(sources.transpose()) : sources);
  Json meta = {{"sample_axis", axis}};
  if (data_meta.contains("image_shape")) meta["image_shape"] = data_meta.at("image_shape");
  write_json(dir / "meta.json", meta);
  write_component_maps(dir, sources, data_meta);
}

/// Reads sources.csv from a dataset or result directory as components x samples.
inline Matrix read_sources(const fs::path& dir) {
  Matrix s = read_csv(dir / "sources.csv");
  if (fs::exists(dir / "meta.json")) {
    const Json meta = read_json(dir / "meta.json");
    if (meta.value("sample_axis", "columns") == "rows") s.transposeInPlace();
  }
  return s;
}

// ---------------------------------------------------------------------------
// DDICA and FastICA runs
// ---------------------------------------------------------------------------

struct DdicaRun {
  TrainResult result;
  Matrix sources;  // p x N on the full dataset
};

inline DdicaRun run_ddica(const RunConfig& rc, const Matrix& observations,
                          const StepCallback& on_step = {}) {
  const NetworkConfig nc = rc.network_config(observations.rows());
  const TrainConfig tc = rc.train_config();
  ModelState model = init_model(nc);
  model.preprocess = fit_preprocess(observations, rc.preprocess, rc.resolved_components(observations.rows()));
  const Matrix x = model.preprocess.apply(observations);
  DdicaRun run;
  run.result = train(std::move(model), x, tc, on_step);
  if (run.result.aborted) throw NumericError(run.result.diagnostic);
  run.sources = separate(run.result.model, observations, tc.whitening);
  return run;
}

inline void write_loss_csv(const fs::path& path, const std::vector<double>& history) {
  std::string text = "step,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    text += std::to_string(i + 1) + "," + format_double(history[i]) + "\n";
  }
  write_text(path, text);
}

/// `ddica train`: model.json, loss.csv, sources.csv (+ meta.json, PGM maps),
/// and the resolved config.json.
inline DdicaRun train_command(const RunConfig& rc, const fs::path& data_dir, const fs::path& out_dir) {
  const Dataset ds = load_dataset(data_dir);
  DdicaRun run = run_ddica(rc, ds.observations);
  fs::create_directories(out_dir);
  write_json(out_dir / "model.json", model_to_json(run.result.model));
  write_loss_csv(out_dir / "loss.csv", run.result.loss_history);
  write_sources(out_dir, run.sources, ds.meta);
  write_json(out_dir / "config.json", run_config_to_json(rc));
  return run;
}

/// `ddica baseline --algo fastica`: sources.csv (+ meta.json, PGM maps) and
/// unmixing.csv (p x d, applied to centered observations).
inline FastIcaResult baseline_command(const fs::path& data_dir, const fs::path& out_dir,
                                      Index components, std::uint64_t seed) {
  const Dataset ds = load_dataset(data_dir);
  FastIcaConfig cfg;
  cfg.n_components = components > 0 ? components : ds.sources.rows();
  cfg.seed = seed;
  FastIcaResult r = fastica(ds.observations, cfg);
  fs::create_directories(out_dir);
  write_sources(out_dir, r.sources, ds.meta);
  write_csv(out_dir / "unmixing.csv", r.unmixing);
  write_json(out_dir / "fastica.json", {{"iterations", r.iterations}, {"converged", r.converged},
                                         {"n_components", cfg.n_components}, {"seed", seed}});
  return r;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

inline Json evaluate(const Matrix& est, const Matrix& gt, const Matrix* unmixing, const Matrix* mixing) {
  const MatchResult m = match_components(est, gt);
  std::vector<double> pmse_values;
  for (Index i = 0; i < gt.rows(); ++i) {
    const Index j = m.permutation[static_cast<std::size_t>(i)];
    pmse_values.push_back(pmse(m.signs[static_cast<std::size_t>(i)] * est.row(j), gt.row(i)));
  }
  std::optional<double> amari;
  if (unmixing && mixing && unmixing->cols() == mixing->rows() && unmixing->rows() == mixing->cols()) {
    amari = amari_index(*unmixing, *mixing);
  }
  return score_report(m, pmse_values, amari ? &*amari : nullptr);
}

/// `ddica eval`: scores est_dir/sources.csv against gt_dir/sources.csv. The
/// Amari index is included when est_dir holds a linear unmixing matrix.
inline Json eval_command(const fs::path& est_dir, const fs::path& gt_dir) {
  const Matrix est = read_sources(est_dir);
  const Matrix gt = read_sources(gt_dir);
  std::optional<Matrix> unmixing, mixing;
  if (fs::exists(est_dir / "unmixing.csv")) unmixing = read_csv(est_dir / "unmixing.csv");
  if (fs::exists(gt_dir / "mixing.csv")) mixing = read_csv(gt_dir / "mixing.csv");
  return evaluate(est, gt, unmixing ? &*unmixing : nullptr, mixing ? &*mixing : nullptr);
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BenchOptions {
  std::string dataset = "sim1";
  int trials = 10;
  std::uint64_t seed = 0;
  double snr = 0.4;
  Index t_frames = 50;
  double nl_level = 0.5;
  Index grid = 64;
  RunConfig config;
  bool verbose = false;
};

struct TrialScore {
  int trial = 0;
  std::uint64_t seed = 0;
  double ddica = 0.0;
  double fastica = 0.0;
};

struct MethodSummary {
  std::string method;
  int trials = 0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Training recipe used by `ddica bench` when no config file is given;
/// configs/bench_<dataset>.json spell out the same values.
inline RunConfig default_bench_config(const std::string& dataset) {
  RunConfig c;
  c.output_dim = 3;
  c.train.epochs = 1000;
  c.train.reconstruction_weight = 10.0;
  c.train.entropy.silverman = true;
  if (dataset == "sim1") {
    // 50 noisy frames of 3 sources: reduce to the 3-dimensional signal subspace.
    c.preprocess = "pca";
    c.preprocess_components = 3;
    c.train.max_steps = 1000;
  } else {
    c.preprocess = "standardize";
    c.train.max_steps = 1200;
  }
  return c;
}

inline Dataset bench_dataset(const BenchOptions& o, std::uint64_t seed) {
  if (o.dataset == "sim1") return gen_sim1(seed, o.t_frames, o.snr);
  if (o.dataset == "sim2") return gen_sim2(seed, o.nl_level, o.grid);
  throw ConfigError("bench: dataset must be sim1 or sim2, got '" + o.dataset + "'");
}

/// One trial: fresh data, network and optimizer seeds all equal to the
/// trial seed; both methods scored by matched mean |r| on the same data.
inline TrialScore run_trial(const BenchOptions& o, int trial) {
  TrialScore t;
  t.trial = trial;
  t.seed = Rng::stream_seed(o.seed, static_cast<std::uint64_t>(trial));
  const Dataset ds = bench_dataset(o, t.seed);

  RunConfig rc = o.config;
  rc.seed = t.seed;
  rc.network_seed.reset();
  rc.train_seed.reset();
  t.ddica = match_components(run_ddica(rc, ds.observations).sources, ds.sources).mean_abs_corr;

  FastIcaConfig fc;
  fc.n_components = ds.sources.rows();
  fc.seed = t.seed;
  t.fastica = match_components(fastica(ds.observations, fc).sources, ds.sources).mean_abs_corr;
  return t;
}

inline MethodSummary summarize(const std::string& method, const std::vector<double>& values) {
  MethodSummary s;
  s.method = method;
  s.trials = static_cast<int>(values.size());
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct BenchResult {
  std::vector<TrialScore> trials;
  std::vector<MethodSummary> summary;
};

/// `ddica bench`: trials.csv (one row per trial and method), summary.csv
/// (mean and sample sd per method), and trial_NNN/scores.json.
inline BenchResult bench_command(const BenchOptions& o, const fs::path& out_dir) {
  if (o.trials < 1) throw ConfigError("bench: trials must be >= 1");
  bench_dataset(o, o.seed);  // validates dataset parameters before any work
  fs::create_directories(out_dir);
  BenchResult r;
  for (int i = 0; i < o.trials; ++i) {
    r.trials.push_back(run_trial(o, i));
    const TrialScore& t = r.trials.back();
    char name[48];
    std::snprintf(name, sizeof(name), "trial_%03d", i);
    fs::create_directories(out_dir / name);
    write_json(out_dir / name / "scores.json",
               {{"trial", t.trial}, {"seed", t.seed}, {"ddica", t.ddica}, {"fastica", t.fastica}});
    if (o.verbose) {
      std::cerr << "trial " << i << " seed " << t.seed << ": ddica " << format_double(t.ddica)
                << ", fastica " << format_double(t.fastica) << "\n";
    }
  }

  std::string trials_csv = "trial,seed,method,mean_abs_corr\n";
  std::vector<double> dd, fi;
  for (const auto& t : r.trials) {
    trials_csv += std::to_string(t.trial) + "," + std::to_string(t.seed) + ",ddica," + format_double(t.ddica) + "\n";
    trials_csv += std::to_string(t.trial) + "," + std::to_string(t.seed) + ",fastica," + format_double(t.fastica) + "\n";
    dd.push_back(t.ddica);
    fi.push_back(t.fastica);
  }
  write_text(out_dir / "trials.csv", trials_csv);

  r.summary = {summarize("ddica", dd), summarize("fastica", fi)};
  std::string summary_csv = "method,trials,mean,sd\n";
  for (const auto& s : r.summary) {
    summary_csv += s.method + "," + std::to_string(s.trials) + "," + format_double(s.mean) + "," +
                   format_double(s.sd) + "\n";
  }
  write_text(out_dir / "summary.csv", summary_csv);
  return r;
}

}  // namespace ddica
