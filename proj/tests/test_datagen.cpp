#include "ddica/datagen.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace ddica;

namespace {

/// Least-squares slope of noise frame t on frame t-1, pooled over frames.
double ar_slope(const Dataset& ds) {
  const Matrix noise = ds.observations - linear_mix(ds.mixing, ds.sources);
  double num = 0.0, den = 0.0;
  for (Index t = 1; t < noise.rows(); ++t) {
    num += noise.row(t).dot(noise.row(t - 1));
    den += noise.row(t - 1).squaredNorm();
  }
  return num / den;
}

double lag1_autocorrelation(const Matrix& field) {
  const Matrix c = field.array() - field.mean();
  const double num = (c.leftCols(c.cols() - 1).array() * c.rightCols(c.cols() - 1).array()).sum() +
                     (c.topRows(c.rows() - 1).array() * c.bottomRows(c.rows() - 1).array()).sum();
  const double count = static_cast<double>((c.cols() - 1) * c.rows() + (c.rows() - 1) * c.cols());
  return num / count / (c.squaredNorm() / static_cast<double>(c.size()));
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ddica_test_datagen_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(GaussianField, UnitSdAndSmoothness) {
  double ac = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix f = gaussian_field(seed, 33, 6.0);
    EXPECT_EQ(f.rows(), 33);
    EXPECT_NEAR(detail::sample_sd(f), 1.0, 1e-12);
    ac += lag1_autocorrelation(f) / 10.0;
  }
  EXPECT_GT(ac, 0.5);
  const Matrix raw = gaussian_field(0, 33, 6.0, false);
  EXPECT_NEAR(detail::sample_sd(raw), 1.0, 1e-12);
  EXPECT_LT(std::abs(lag1_autocorrelation(raw)), 0.1);
  EXPECT_THROW(gaussian_field(0, 33, 0.0), ConfigError);
}

TEST(GaussianField, ReflectIndex) {
  EXPECT_EQ(detail::reflect_index(-1, 5), 0);
  EXPECT_EQ(detail::reflect_index(-2, 5), 1);
  EXPECT_EQ(detail::reflect_index(5, 5), 4);
  EXPECT_EQ(detail::reflect_index(6, 5), 3);
  EXPECT_EQ(detail::reflect_index(2, 5), 2);
}

TEST(LinearMix, ProductAndShapeError) {
  Matrix a(2, 2), s(2, 3);
  a << 1, 2, 3, 4;
  s << 1, 0, 1, 0, 1, 1;
  Matrix expected(2, 3);
  expected << 1, 2, 3, 3, 4, 7;
  EXPECT_EQ(linear_mix(a, s), expected);
  EXPECT_THROW(linear_mix(a, Matrix::Ones(3, 3)), DimensionError);
}

TEST(Sim1, ShapesIntensitiesAndMasks) {
  const Dataset ds = gen_sim1(0);
  EXPECT_EQ(ds.sources.rows(), 3);
  EXPECT_EQ(ds.sources.cols(), 1089);
  EXPECT_EQ(ds.observations.rows(), 50);
  EXPECT_EQ(ds.observations.cols(), 1089);
  EXPECT_EQ(ds.mixing.rows(), 50);
  for (Index k = 0; k < 3; ++k) {
    Index active = 0;
    for (Index v = 0; v < 1089; ++v) {
      const double s = ds.sources(k, v);
      if (s != 0.0) {
        ++active;
        EXPECT_GE(s, 0.5);
        EXPECT_LT(s, 1.0);
      }
    }
    EXPECT_GT(active, 20);
  }
  EXPECT_EQ(ds.meta.at("image_shape"), Json::array({33, 33}));
}

TEST(Sim1, SnrIsExact) {
  for (double snr : {0.4, 0.1, 2.0}) {
    EXPECT_NEAR(measured_snr(gen_sim1(3, 50, snr)), snr, 1e-6);
  }
  EXPECT_NEAR(measured_snr(gen_sim1(4, 10, 0.4)), 0.4, 1e-6);
}

TEST(Sim1, ArCoefficientRecovered) {
  double slope = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) slope += ar_slope(gen_sim1(seed)) / 10.0;
  EXPECT_NEAR(slope, 0.47, 0.05);
}

TEST(Sim1, DeterministicAndValidated) {
  const Dataset a = gen_sim1(7), b = gen_sim1(7), c = gen_sim1(8);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_NE(a.observations, c.observations);
  EXPECT_THROW(gen_sim1(0, 2), ConfigError);
  EXPECT_THROW(gen_sim1(0, 50, 0.0), ConfigError);
}

TEST(Sim2, StandardizedSources) {
  const Dataset ds = gen_sim2(0, 0.5);
  EXPECT_EQ(ds.sources.rows(), 3);
  EXPECT_EQ(ds.sources.cols(), 64 * 64);
  for (Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(ds.sources.row(k).mean(), 0.0, 1e-9);
    EXPECT_NEAR(ds.sources.row(k).squaredNorm() / 4096.0, 1.0, 1e-9);
  }
}

TEST(Sim2, NonlinearityLevels) {
  const Dataset lin = gen_sim2(1, 0.0);
  EXPECT_EQ(lin.observations, Matrix(lin.mixing * lin.sources));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset full = gen_sim2(seed, 1.0);
    const Matrix as = full.mixing * full.sources;
    EXPECT_GT((full.observations - as).norm() / as.norm(), 0.1);
  }
  const Dataset a = gen_sim2(2, 0.5), b = gen_sim2(2, 0.5 + 1e-6);
  EXPECT_LT((a.observations - b.observations).norm() / a.observations.norm(), 1e-4);
}

TEST(Sim2, Validation) {
  EXPECT_THROW(gen_sim2(0, 1.5), ConfigError);
  EXPECT_THROW(gen_sim2(0, -0.1), ConfigError);
  EXPECT_THROW(gen_sim2(0, 0.5, 8), ConfigError);
  try {
    gen_sim2(0, 1.5);
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
}

TEST(Sim3, DimensionsAndNoiseRatio) {
  const Dataset ds = gen_sim3(1);
  EXPECT_EQ(ds.observations.rows(), 10);
  EXPECT_EQ(ds.observations.cols(), 5000);
  EXPECT_EQ(ds.labels.size(), 5000u);
  Vector var(10);
  for (Index i = 0; i < 10; ++i) {
    const auto r = ds.observations.row(i);
    var[i] = (r.array() - r.mean()).square().mean();
  }
  EXPECT_GE(var.head(2).minCoeff() / var.tail(8).maxCoeff(), 1e3);
}

TEST(Sim3, CentersAndVariances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = gen_sim3(seed);
    const Matrix centers = matrix_from_json(ds.meta.at("cluster_centers"), "centers");
    EXPECT_LE(centers.cwiseAbs().maxCoeff(), 5.0);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> xs;
      for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (ds.labels[i] == k) xs.push_back(ds.sources(0, static_cast<Index>(i)));
      }
      EXPECT_EQ(xs.size(), 1000u);
      double m = 0.0, v = 0.0;
      for (double x : xs) m += x / 1000.0;
      for (double x : xs) v += (x - m) * (x - m) / 999.0;
      EXPECT_GE(v, 0.4);
      EXPECT_LE(v, 3.3);
    }
  }
  EXPECT_THROW(gen_sim3(0, 10), ConfigError);
}

TEST(Persistence, RoundTripAndOrientation) {
  const auto dir = temp_dir("sim3");
  const Dataset ds = gen_sim3(2, 100);
  write_dataset(dir, ds);
  EXPECT_EQ(read_csv(dir / "observations.csv").cols(), 10);
  EXPECT_TRUE(std::filesystem::exists(dir / "labels.csv"));
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back.observations, ds.observations);
  EXPECT_EQ(back.sources, ds.sources);
  EXPECT_EQ(back.meta, ds.meta);

  const auto dir1 = temp_dir("sim1");
  const Dataset s1 = gen_sim1(0, 5);
  write_dataset(dir1, s1);
  EXPECT_EQ(read_csv(dir1 / "observations.csv").rows(), 5);
  EXPECT_EQ(load_dataset(dir1).observations, s1.observations);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir1);
}
