#include "sdb/metrics.hpp"

#include "sdb/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sdb {

void MetricWeights::validate() const {
  if (std::abs(omega0 + omega1 - 1.0) > 1e-12)
    throw UsageError("metric weights must sum to 1");
  if (omega0 < 0.5 || omega1 < 0.0)
    throw UsageError("omega0 must be at least 0.5 and omega1 nonnegative");
  if (!(kappa > 0.0))
    throw UsageError("kappa must be positive");
}

namespace {

// Angle between unit vectors as 2 atan2(|x^ - y^|, |x^ + y^|). Equal to
// acos(x.y / |x||y|) but keeps full precision near zero, where acos of a
// rounded cosine loses half the digits.
double angle_unchecked(std::span<const double> x, std::span<const double> y,
                       double nx, double ny) {
  double dm = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] / nx, b = y[i] / ny;
    dm += (a - b) * (a - b);
    dp += (a + b) * (a + b);
  }
  return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x)
    s += v * v;
  return std::sqrt(s);
}

} // namespace

double spectral_angle(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw UsageError("spectral angle of spectra with different band counts");
  const double nx = norm(x), ny = norm(y);
  if (!(nx > 0.0) || !(ny > 0.0))
    throw DegenerateError("spectral angle of a zero-norm spectrum");
  return angle_unchecked(x, y, nx, ny);
}

double spectral_angle_or_max(std::span<const double> x,
                             std::span<const double> y) noexcept {
  const double nx = norm(x), ny = norm(y);
  if (!(nx > 0.0) || !(ny > 0.0) || !std::isfinite(nx) || !std::isfinite(ny))
    return std::numbers::pi / 2;
  return angle_unchecked(x, y, nx, ny);
}

namespace metrics {

double e_rms(const SpectralStack &measured, const SpectralStack &modelled) {
  if (!measured.same_shape(modelled))
    throw UsageError("measured and modelled stacks differ in shape");
  double sq = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < measured.values.size(); ++i) {
    const double d = modelled.values[i] - measured.values[i];
    sq += d * d;
    sum += measured.values[i];
  }
  if (!(sum > 0.0))
    throw DegenerateError("measured reflectance sums to " +
                          std::to_string(sum));
  return std::sqrt(sq) / sum;
}

double e_sam(const SpectralStack &measured, const SpectralStack &modelled) {
  if (!measured.same_shape(modelled))
    throw UsageError("measured and modelled stacks differ in shape");
  const std::size_t n = measured.n_scenes * measured.n_pixels;
  if (n == 0)
    throw UsageError("empty spectral stack");
  double total = 0.0;
  for (std::size_t j = 0; j < measured.n_scenes; ++j)
    for (std::size_t i = 0; i < measured.n_pixels; ++i)
      total += spectral_angle(modelled.spectrum(j, i), measured.spectrum(j, i));
  return total / static_cast<double>(n);
}

double e_depth_continuity(std::span<const double> H, double kappa) {
  if (H.empty())
    throw UsageError("depth continuity of an empty region");
  double mean = 0.0;
  for (double h : H)
    mean += h;
  mean /= static_cast<double>(H.size());
  if (!(mean > 0.0))
    throw DomainError("mean depth must be positive for the continuity error");
  double acc = 0.0;
  for (double h : H) {
    const double dev = h - mean;
    if (std::abs(dev) > kappa * mean)
      acc += (dev / mean) * (dev / mean);
  }
  return std::sqrt(acc / static_cast<double>(H.size()));
}

double e_photic(const SpectralStack &measured, const SpectralStack &modelled,
                std::span<const double> H, const MetricWeights &w) {
  return w.omega0 * e_rms(measured, modelled) * e_sam(measured, modelled) +
         w.omega1 * e_depth_continuity(H, w.kappa);
}

namespace {
void check_unmixed(std::span<const double> a, std::span<const double> b,
                   std::size_t n_bands) {
  if (a.size() != b.size() || n_bands == 0 || a.size() % n_bands != 0 ||
      a.empty())
    throw UsageError("unmixed and modelled albedos differ in shape");
}
} // namespace

double e_unmixed_rms(std::span<const double> unmixed,
                     std::span<const double> modelled, std::size_t n_bands) {
  check_unmixed(unmixed, modelled, n_bands);
  double sq = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < unmixed.size(); ++i) {
    const double d = unmixed[i] - modelled[i];
    sq += d * d;
    sum += modelled[i];
  }
  if (!(sum > 0.0))
    throw DegenerateError("modelled albedo sums to a nonpositive value");
  return std::sqrt(sq) / sum;
}

double e_unmixed_sam(std::span<const double> unmixed,
                     std::span<const double> modelled, std::size_t n_bands) {
  check_unmixed(unmixed, modelled, n_bands);
  const std::size_t n_scenes = unmixed.size() / n_bands;
  double total = 0.0;
  for (std::size_t j = 0; j < n_scenes; ++j)
    total += spectral_angle(unmixed.subspan(j * n_bands, n_bands),
                            modelled.subspan(j * n_bands, n_bands));
  return total / static_cast<double>(n_scenes);
}

double e_unmixed(std::span<const double> unmixed,
                 std::span<const double> modelled, std::size_t n_bands) {
  return e_unmixed_rms(unmixed, modelled, n_bands) *
         e_unmixed_sam(unmixed, modelled, n_bands);
}

} // namespace metrics
} // namespace sdb
