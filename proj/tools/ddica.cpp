// ddica: command-line front end.
//
//   ddica gen       --dataset {sim1|sim2|sim3} --seed S --out DIR [--snr F] [--nl-level F] [--grid N]
//   ddica train     --config cfg.json --data DIR --out DIR
//   ddica eval      --est DIR --gt DIR --out report.json
//   ddica baseline  --algo fastica --data DIR --out DIR
//   ddica gradcheck --seed S
//   ddica bench     --dataset sim1 --trials K --seed S --out DIR [--config cfg.json]
//
// Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.

#include "ddica/gradcheck.hpp"
#include "ddica/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using namespace ddica;

constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct Options {
  std::string dataset = "sim1";
  std::uint64_t seed = 0;
  std::string out;
  double snr = 0.4;
  double nl_level = 0.5;
  Index grid = 64;
  Index t_frames = 50;
  Index n_samples = 5000;
  std::string config;
  std::string data;
  std::string est;
  std::string gt;
  std::string algo = "fastica";
  Index components = 0;
  int trials = 10;
  bool verbose = false;
};

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

int cmd_gen(const Options& o) {
  Dataset ds;
  if (o.dataset == "sim1") {
    ds = gen_sim1(o.seed, o.t_frames, o.snr);
  } else if (o.dataset == "sim2") {
    ds = gen_sim2(o.seed, o.nl_level, o.grid);
  } else if (o.dataset == "sim3") {
    ds = gen_sim3(o.seed, o.n_samples);
  } else {
    throw ConfigError("gen: unknown dataset '" + o.dataset + "'");
  }
  write_dataset(o.out, ds);
  return 0;
}

int cmd_train(const Options& o) {
  RunConfig rc = config_or_default(o.config);
  if (!o.data.empty()) rc.data = o.data;
  if (!o.out.empty()) rc.out = o.out;
  if (rc.data.empty() || rc.out.empty()) throw ConfigError("train: --data and --out are required");
  const DdicaRun run = train_command(rc, rc.data, rc.out);
  std::cout << "steps " << run.result.loss_history.size() << ", final loss "
            << (run.result.loss_history.empty() ? 0.0 : run.result.loss_history.back()) << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const Json report = eval_command(o.est, o.gt);
  write_json(o.out, report);
  std::cout << "mean_abs_corr " << format_double(report.at("mean_abs_corr").get<double>()) << "\n";
  return 0;
}

int cmd_baseline(const Options& o) {
  if (o.algo != "fastica") throw ConfigError("baseline: unknown algorithm '" + o.algo + "'");
  const FastIcaResult r = baseline_command(o.data, o.out, o.components, o.seed);
  if (!r.converged) std::cerr << "warning: FastICA did not converge in " << r.iterations << " iterations\n";
  return 0;
}

int cmd_gradcheck(const Options& o) {
  const GradCheckResult r = gradient_check(o.seed);
  std::cout << "max rel. err " << r.max_rel_error << " over " << r.parameters
            << " parameters (worst: " << r.worst << ")\n";
  return r.max_rel_error < 1e-4 ? 0 : kRuntime;
}

int cmd_bench(const Options& o) {
  BenchOptions b;
  b.dataset = o.dataset;
  b.trials = o.trials;
  b.seed = o.seed;
  b.snr = o.snr;
  b.t_frames = o.t_frames;
  b.nl_level = o.nl_level;
  b.grid = o.grid;
  b.config = o.config.empty() ? default_bench_config(o.dataset) : load_run_config(o.config);
  b.verbose = o.verbose;
  const BenchResult r = bench_command(b, o.out);
  for (const auto& s : r.summary) {
    std::cout << s.method << " " << format_double(s.mean) << " +- " << format_double(s.sd) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep deterministic nonlinear ICA"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset directory");
  gen->add_option("--dataset", o.dataset)->required()->check(CLI::IsMember({"sim1", "sim2", "sim3"}));
  gen->add_option("--seed", o.seed);
  gen->add_option("--out", o.out)->required();
  gen->add_option("--snr", o.snr, "sim1 signal-to-noise ratio");
  gen->add_option("--t-frames", o.t_frames, "sim1 number of frames");
  gen->add_option("--nl-level", o.nl_level, "sim2 nonlinearity level in [0, 1]");
  gen->add_option("--grid", o.grid, "sim2 lattice size");
  gen->add_option("--n-samples", o.n_samples, "sim3 sample count");

  auto* train = app.add_subcommand("train", "Train DDICA on a dataset directory");
  train->add_option("--config", o.config);
  train->add_option("--data", o.data);
  train->add_option("--out", o.out);

  auto* eval = app.add_subcommand("eval", "Score estimated sources against ground truth");
  eval->add_option("--est", o.est)->required();
  eval->add_option("--gt", o.gt)->required();
  eval->add_option("--out", o.out)->required();

  auto* baseline = app.add_subcommand("baseline", "Run a baseline separation");
  baseline->add_option("--algo", o.algo);
  baseline->add_option("--data", o.data)->required();
  baseline->add_option("--out", o.out)->required();
  baseline->add_option("--components", o.components, "0: number of ground-truth sources");
  baseline->add_option("--seed", o.seed);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
  gradcheck->add_option("--seed", o.seed);

  auto* bench = app.add_subcommand("bench", "Repeated-trial DDICA vs FastICA benchmark");
  bench->add_option("--dataset", o.dataset)->check(CLI::IsMember({"sim1", "sim2"}));
  bench->add_option("--trials", o.trials);
  bench->add_option("--seed", o.seed);
  bench->add_option("--out", o.out)->required();
  bench->add_option("--config", o.config);
  bench->add_option("--snr", o.snr);
  bench->add_option("--nl-level", o.nl_level);
  bench->add_option("--grid", o.grid);
  bench->add_flag("--verbose", o.verbose, "Print per-trial scores to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*baseline) return cmd_baseline(o);
    if (*gradcheck) return cmd_gradcheck(o);
    if (*bench) return cmd_bench(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
