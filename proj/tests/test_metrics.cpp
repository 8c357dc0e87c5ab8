#include "sdb/error.hpp"
#include "sdb/metrics.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace sdb;
using doctest::Approx;

namespace {

SpectralStack random_stack(std::mt19937_64 &rng, std::size_t s, std::size_t p,
                           std::size_t b) {
  std::uniform_real_distribution<double> U(0.001, 0.02);
  SpectralStack st(s, p, b);
  for (auto &v : st.values)
    v = U(rng);
  return st;
}

double oracle_angle(std::span<const double> x, std::span<const double> y) {
  double xy = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  return std::acos(std::clamp(xy / std::sqrt(xx * yy), -1.0, 1.0));
}

} // namespace

TEST_CASE("rms error") {
  SpectralStack m(1, 1, 4), d(1, 1, 4);
  m.values = {4, 3, 2, 1};
  d.values = {5, 3, 2, 1};
  CHECK(metrics::e_rms(m, d) == Approx(0.1).epsilon(1e-15));
  CHECK(metrics::e_rms(m, m) == 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    auto a = random_stack(rng, 2, 9, 4), b = random_stack(rng, 2, 9, 4);
    auto a2 = a, b2 = b;
    for (auto &v : a2.values)
      v *= 2;
    for (auto &v : b2.values)
      v *= 2;
    CHECK(metrics::e_rms(a2, b2) == Approx(metrics::e_rms(a, b)).epsilon(1e-12));
    CHECK(metrics::e_rms(a, b) > 0.0);
  }
  SpectralStack z(1, 1, 2);
  CHECK_THROWS_AS(metrics::e_rms(z, z), DegenerateError);
}

TEST_CASE("spectral angle") {
  const std::vector<double> x{1, 0}, y{0, 1};
  CHECK(spectral_angle(x, y) == Approx(M_PI / 2).epsilon(1e-15));
  CHECK_THROWS_AS(spectral_angle(std::vector<double>{0, 0}, y), DegenerateError);
  CHECK(spectral_angle_or_max(std::vector<double>{0, 0}, y) == Approx(M_PI / 2));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    auto a = random_stack(rng, 2, 9, 4), b = random_stack(rng, 2, 9, 4);
    double mean = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t p = 0; p < 9; ++p)
        mean += oracle_angle(a.spectrum(j, p), b.spectrum(j, p)) / 18.0;
    CHECK(metrics::e_sam(a, b) == Approx(mean).epsilon(1e-10));
    // Positive per-spectrum rescaling leaves the angle unchanged.
    auto c = b;
    std::uniform_real_distribution<double> S(0.1, 10.0);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t p = 0; p < 9; ++p) {
        const double s = S(rng);
        for (auto &v : c.spectrum(j, p))
          v *= s;
      }
    CHECK(std::abs(metrics::e_sam(a, c) - metrics::e_sam(a, b)) < 1e-12);
    auto a3 = a;
    for (auto &v : a3.values)
      v *= 3.7;
    CHECK(metrics::e_sam(a, a3) < 1e-12);
  }
}

TEST_CASE("depth continuity") {
  CHECK(metrics::e_depth_continuity(std::vector<double>(9, 7.0), 0.1) == 0.0);
  const std::vector<double> H{10, 10, 10, 10, 10, 10, 10, 10, 12};
  const double mean = 92.0 / 9.0;
  const double oracle = std::sqrt(std::pow((12 - mean) / mean, 2) / 9.0);
  CHECK(metrics::e_depth_continuity(H, 0.1) == Approx(oracle).epsilon(1e-14));
  CHECK(std::abs(metrics::e_depth_continuity(H, 0.1) - 4.0 / 69.0) < 1e-6);
  // Inside the gate every term is excluded.
  CHECK(metrics::e_depth_continuity(std::vector<double>{10, 10.5, 9.5, 10.9}, 0.1) == 0.0);
  CHECK(metrics::e_depth_continuity(std::vector<double>{10, 10.5, 9.5, 12.5}, 0.1) > 0.0);
  CHECK_THROWS_AS(metrics::e_depth_continuity(std::vector<double>{0, 0}, 0.1), DomainError);
}

TEST_CASE("combined metric") {
  MetricWeights w;
  SpectralStack m(1, 1, 4), d(1, 1, 4);
  m.values = {4, 3, 2, 1};
  d.values = {5, 3, 2, 1};
  const std::vector<double> H{10, 10, 10, 10, 10, 10, 10, 10, 12};
  const double rms = 0.1, sam = oracle_angle(m.values, d.values);
  const double eh = metrics::e_depth_continuity(H, 0.1);
  CHECK(std::abs(metrics::e_photic(m, d, H, w) - (0.85 * rms * sam + 0.15 * eh)) < 1e-12);
  CHECK(metrics::e_photic(m, m, std::vector<double>(9, 5.0), w) == 0.0);
  CHECK(std::abs(0.85 * 0.1 * 0.2 + 0.15 * 0.05 - 0.0245) < 1e-12);
  CHECK(metrics::to_percent(0.0396) == Approx(3.96));
  MetricWeights bad{0.4, 0.6, 0.1};
  CHECK_THROWS_AS(bad.validate(), UsageError);
  MetricWeights sum{0.8, 0.3, 0.1};
  CHECK_THROWS_AS(sum.validate(), UsageError);
}

TEST_CASE("unmixing error") {
  const std::vector<double> a{0.2, 0.3, 0.35, 0.1, 0.21, 0.31, 0.33, 0.12};
  CHECK(metrics::e_unmixed(a, a, 4) == 0.0);
  std::vector<double> twice(a);
  for (auto &v : twice)
    v *= 2;
  CHECK(metrics::e_unmixed_sam(twice, a, 4) < 1e-12);
  CHECK(metrics::e_unmixed(twice, a, 4) < 1e-12);
  CHECK(metrics::e_unmixed_rms(twice, a, 4) > 0.1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 0.01);
  for (int i = 0; i < 50; ++i) {
    auto b = a;
    for (auto &v : b)
      v += N(rng);
    CHECK(metrics::e_unmixed(b, a, 4) > 0.0);
  }
  CHECK_THROWS_AS(metrics::e_unmixed(a, std::vector<double>(3, 0.1), 4), UsageError);
}
