#pragma once

// Synthetic benchmark generators.
//
//   sim1  three 33x33 digit-shaped spatial sources, mixed over T frames by
//         unit-normal time courses, plus spatially smooth AR(1) noise scaled
//         to a target SNR.
//   sim2  three analytic 2-D patterns (ring, spiral, bipolar blobs) mixed
//         by A S + a tanh(A S) + a^2 sin(A S).
//   sim3  five isotropic Gaussian clusters in 2-D, embedded in 10-D with
//         eight low-variance noise dimensions.
//
// In memory every Dataset keeps one component per row and one sample per
// column. sim3 is written to disk with one sample per row instead, which
// meta.json records as "sample_axis": "rows".

#include "ddica/common.hpp"
#include "ddica/digit_masks.hpp"
#include "ddica/io.hpp"
#include "ddica/linalg.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace ddica {

struct Dataset {
  Matrix sources;       // Q x N
  Matrix observations;  // d x N
  Matrix mixing;        // d x Q
  std::vector<int> labels;
  Json meta;

  bool samples_as_rows() const { return meta.value("sample_axis", "columns") == "rows"; }
};

inline constexpr int kSim1Side = 33;
inline constexpr double kSim1ArCoef = 0.47;
inline constexpr double kSim1Fwhm = 6.0;

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

inline Matrix linear_mix(const Matrix& a, const Matrix& s) {
  if (a.cols() != s.rows()) {
    throw DimensionError("linear_mix: cannot multiply " + shape_str(a) + " by " + shape_str(s));
  }
  return a * s;
}

namespace detail {

/// Half-sample symmetric reflection of an index into [0, n).
inline Index reflect_index(Index i, Index n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

inline Matrix convolve_rows(const Matrix& in, const std::vector<double>& kernel, Index radius) {
  Matrix out(in.rows(), in.cols());
  for (Index r = 0; r < in.rows(); ++r) {
    for (Index c = 0; c < in.cols(); ++c) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * in(r, reflect_index(c + k, in.cols()));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

inline double sample_sd(const Matrix& m) {
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size() - 1));
}

}  // namespace detail

/// White Gaussian field on a side x side grid, smoothed with a Gaussian
/// kernel of the given FWHM (sd = fwhm / (2 sqrt(2 ln 2)), truncated at four
/// sd, reflect-padded) and rescaled to unit sample sd. With smooth = false
/// the white field is only rescaled.
inline Matrix gaussian_field(Rng& rng, Index side, double fwhm, bool smooth = true) {
  if (side < 2) throw ConfigError("gaussian_field: side must be >= 2");
  if (smooth && !(fwhm > 0.0)) throw ConfigError("gaussian_field: fwhm must be > 0");
  Matrix field = rng.normal_matrix(side, side);
  if (smooth) {
    const double sd = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const Index radius = static_cast<Index>(std::ceil(4.0 * sd));
    std::vector<double> kernel;
    double total = 0.0;
    for (Index k = -radius; k <= radius; ++k) {
      kernel.push_back(std::exp(-static_cast<double>(k * k) / (2.0 * sd * sd)));
      total += kernel.back();
    }
    for (double& w : kernel) w /= total;
    field = detail::convolve_rows(field, kernel, radius);
    field = detail::convolve_rows(field.transpose(), kernel, radius).transpose();
  }
  return field / detail::sample_sd(field);
}

inline Matrix gaussian_field(std::uint64_t seed, Index side, double fwhm, bool smooth = true) {
  Rng rng(seed);
  return gaussian_field(rng, side, fwhm, smooth);
}

/// Sum of the nonzero eigenvalues of the voxel-wise covariance of a T x V
/// frame matrix (rows centered over voxels, normalized by V).
inline double covariance_eigen_sum(const Matrix& frames) {
  Matrix c = frames;
  c.colwise() -= c.rowwise().mean();
  const Matrix cov = (c * c.transpose()) / static_cast<double>(frames.cols());
  const EigenDecomposition eig = symmetric_eigen(0.5 * (cov + cov.transpose()));
  const double cutoff = 1e-10 * std::max(eig.values[0], 0.0);
  double total = 0.0;
  for (Index i = eig.values.size() - 1; i >= 0; --i) {
    if (eig.values[i] > cutoff) total += eig.values[i];
  }
  return total;
}

/// Per-entry noise variance under the same convention: frames centered over
/// voxels, squared deviations averaged over all T x V entries.
inline double noise_variance(const Matrix& noise) {
  Matrix c = noise;
  c.colwise() -= c.rowwise().mean();
  return c.squaredNorm() / static_cast<double>(noise.size());
}

/// SNR = (1 / (T sigma^2)) * sum of nonzero signal-covariance eigenvalues.
inline double snr_of(const Matrix& signal, const Matrix& noise) {
  return covariance_eigen_sum(signal) / (static_cast<double>(signal.rows()) * noise_variance(noise));
}

/// SNR of a sim1 dataset recomputed from its emitted matrices.
inline double measured_snr(const Dataset& ds) {
  const Matrix signal = linear_mix(ds.mixing, ds.sources);
  return snr_of(signal, ds.observations - signal);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

inline Dataset gen_sim1(std::uint64_t seed, Index t_frames = 50, double snr = 0.4) {
  constexpr Index q = 3;
  if (t_frames < q) throw ConfigError("sim1: t_frames must be >= 3");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("sim1: snr must be a positive number");
  const Index voxels = kSim1Side * kSim1Side;
  Rng rng(seed);

  Dataset ds;
  ds.sources = Matrix::Zero(q, voxels);
  for (Index k = 0; k < q; ++k) {
    const auto& mask = fixtures::kSim1Masks[static_cast<std::size_t>(k)];
    for (Index r = 0; r < kSim1Side; ++r) {
      for (Index c = 0; c < kSim1Side; ++c) {
        if (mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '#') {
          ds.sources(k, r * kSim1Side + c) = rng.uniform(0.5, 1.0);
        }
      }
    }
  }
  ds.mixing = rng.normal_matrix(t_frames, q);

  Matrix noise(t_frames, voxels);
  Matrix frame = gaussian_field(rng, kSim1Side, kSim1Fwhm);
  noise.row(0) = frame.reshaped<Eigen::RowMajor>().transpose();
  for (Index t = 1; t < t_frames; ++t) {
    frame = kSim1ArCoef * frame + gaussian_field(rng, kSim1Side, kSim1Fwhm);
    noise.row(t) = frame.reshaped<Eigen::RowMajor>().transpose();
  }

  const Matrix signal = linear_mix(ds.mixing, ds.sources);
  const double eigen_sum = covariance_eigen_sum(signal);
  const double target_variance = eigen_sum / (static_cast<double>(t_frames) * snr);
  noise *= std::sqrt(target_variance / noise_variance(noise));
  ds.observations = signal + noise;

  ds.meta = {{"generator", "sim1"},
             {"seed", seed},
             {"sample_axis", "columns"},
             {"image_shape", {kSim1Side, kSim1Side}},
             {"params",
              {{"t_frames", t_frames},
               {"snr", snr},
               {"ar_coef", kSim1ArCoef},
               {"fwhm", kSim1Fwhm},
               {"intensity_range", {0.5, 1.0}},
               {"mixing", "unit-normal time courses"}}},
             {"signal_eigen_sum", eigen_sum},
             {"noise_variance", target_variance}};
  return ds;
}

struct Sim2Patterns {
  double ring_radius = 0.5;
  double ring_width = 0.1;
  double spiral_angular = 5.0;
  double spiral_radial = 10.0;
  double blob_offset = 0.5;
  double blob_sd = 0.2;
};

/// The three standardized sim2 sources on a grid x grid lattice over [-1, 1]^2.
inline Matrix sim2_sources(Index grid, const Sim2Patterns& pat = {}) {
  Matrix s(3, grid * grid);
  for (Index r = 0; r < grid; ++r) {
    const double y = -1.0 + 2.0 * static_cast<double>(r) / static_cast<double>(grid - 1);
    for (Index c = 0; c < grid; ++c) {
      const double x = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(grid - 1);
      const double rho = std::hypot(x, y);
      const double theta = std::atan2(y, x);
      const double blob_var2 = 2.0 * pat.blob_sd * pat.blob_sd;
      const Index v = r * grid + c;
      s(0, v) = std::exp(-(rho - pat.ring_radius) * (rho - pat.ring_radius) /
                         (2.0 * pat.ring_width * pat.ring_width));
      s(1, v) = std::sin(pat.spiral_angular * theta + pat.spiral_radial * rho);
      s(2, v) = std::exp(-((x - pat.blob_offset) * (x - pat.blob_offset) + y * y) / blob_var2) -
                std::exp(-((x + pat.blob_offset) * (x + pat.blob_offset) + y * y) / blob_var2);
    }
  }
  for (Index k = 0; k < 3; ++k) {
    const double mean = s.row(k).mean();
    s.row(k).array() -= mean;
    const double sd = std::sqrt(s.row(k).squaredNorm() / static_cast<double>(s.cols()));
    s.row(k) /= sd;
  }
  return s;
}

/// X = A S + nl tanh(A S) + nl^2 sin(A S), elementwise.
inline Matrix sim2_mix(const Matrix& linear, double nl_level) {
  if (nl_level == 0.0) return linear;
  return (linear.array() + nl_level * linear.array().tanh() +
          nl_level * nl_level * linear.array().sin())
      .matrix();
}

inline Dataset gen_sim2(std::uint64_t seed, double nl_level, Index grid = 64) {
  if (!(nl_level >= 0.0 && nl_level <= 1.0)) {
    throw ConfigError("sim2: nl-level " + format_double(nl_level) + " is out of range [0, 1]");
  }
  if (grid < 16) throw ConfigError("sim2: grid must be >= 16");
  const Sim2Patterns pat;
  Rng rng(seed);
  Dataset ds;
  ds.sources = sim2_sources(grid, pat);
  ds.mixing = rng.normal_matrix(3, 3);
  ds.observations = sim2_mix(linear_mix(ds.mixing, ds.sources), nl_level);
  ds.meta = {{"generator", "sim2"},
             {"seed", seed},
             {"sample_axis", "columns"},
             {"image_shape", {grid, grid}},
             {"params",
              {{"nl_level", nl_level},
               {"grid", grid},
               {"ring_radius", pat.ring_radius},
               {"ring_width", pat.ring_width},
               {"spiral_frequencies", {pat.spiral_angular, pat.spiral_radial}},
               {"blob_centers", {{pat.blob_offset, 0.0}, {-pat.blob_offset, 0.0}}},
               {"blob_sd", pat.blob_sd}}}};
  return ds;
}

inline Dataset gen_sim3(std::uint64_t seed, Index n_samples = 5000) {
  constexpr Index clusters = 5;
  constexpr Index noise_dims = 8;
  if (n_samples < 50) throw ConfigError("sim3: n-samples must be >= 50");
  Rng rng(seed);
  Matrix centers(clusters, 2);
  Vector variances(clusters);
  for (Index k = 0; k < clusters; ++k) {
    centers(k, 0) = rng.uniform(-5.0, 5.0);
    centers(k, 1) = rng.uniform(-5.0, 5.0);
    variances[k] = rng.uniform(0.5, 3.0);
  }

  Dataset ds;
  ds.sources.resize(2, n_samples);
  ds.observations.resize(2 + noise_dims, n_samples);
  Index col = 0;
  for (Index k = 0; k < clusters; ++k) {
    const Index count = n_samples / clusters + (k < n_samples % clusters ? 1 : 0);
    const double sd = std::sqrt(variances[k]);
    for (Index i = 0; i < count; ++i, ++col) {
      ds.sources(0, col) = centers(k, 0) + sd * rng.normal();
      ds.sources(1, col) = centers(k, 1) + sd * rng.normal();
      ds.labels.push_back(static_cast<int>(k));
    }
  }
  ds.observations.topRows(2) = ds.sources;
  ds.observations.bottomRows(noise_dims) = 0.01 * rng.normal_matrix(noise_dims, n_samples);
  ds.mixing = Matrix::Zero(2 + noise_dims, 2);
  ds.mixing(0, 0) = 1.0;
  ds.mixing(1, 1) = 1.0;

  ds.meta = {{"generator", "sim3"},
             {"seed", seed},
             {"sample_axis", "rows"},
             {"params", {{"n_samples", n_samples}, {"clusters", clusters}, {"noise_dims", noise_dims},
                         {"noise_scale", 0.01}}},
             {"cluster_centers", matrix_to_json(centers)},
             {"cluster_variances", vector_to_json(variances)}};
  return ds;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  const bool rows = ds.samples_as_rows();
  write_csv(dir / "sources.csv", rows ? Matrix(ds.sources.transpose()) : ds.sources);
  write_csv(dir / "observations.csv", rows ? Matrix(ds.observations.transpose()) : ds.observations);
  write_csv(dir / "mixing.csv", ds.mixing);
  if (!ds.labels.empty()) {
    std::string text;
    for (int l : ds.labels) text += std::to_string(l) + '\n';
    write_text(dir / "labels.csv", text);
  }
  write_json(dir / "meta.json", ds.meta);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.meta = read_json(dir / "meta.json");
  ds.sources = read_csv(dir / "sources.csv");
  ds.observations = read_csv(dir / "observations.csv");
  if (std::filesystem::exists(dir / "mixing.csv")) ds.mixing = read_csv(dir / "mixing.csv");
  if (ds.samples_as_rows()) {
    ds.sources.transposeInPlace();
    ds.observations.transposeInPlace();
  }
  if (ds.sources.cols() != ds.observations.cols()) {
    throw IoError(dir.string() + ": sources and observations disagree on sample count");
  }
  return ds;
}

}  // namespace ddica
