#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdb {

/// Spectra laid out [scene][pixel][band].
struct SpectralStack {
  std::size_t n_scenes = 0;
  std::size_t n_pixels = 0;
  std::size_t n_bands = 0;
  std::vector<double> values;

  SpectralStack() = default;
  SpectralStack(std::size_t scenes, std::size_t pixels, std::size_t bands)
      : n_scenes(scenes), n_pixels(pixels), n_bands(bands),
        values(scenes * pixels * bands, 0.0) {}

  std::span<double> spectrum(std::size_t scene, std::size_t pixel) {
    return {values.data() + (scene * n_pixels + pixel) * n_bands, n_bands};
  }
  std::span<const double> spectrum(std::size_t scene,
                                   std::size_t pixel) const {
    return {values.data() + (scene * n_pixels + pixel) * n_bands, n_bands};
  }
  bool same_shape(const SpectralStack &o) const {
    return n_scenes == o.n_scenes && n_pixels == o.n_pixels &&
           n_bands == o.n_bands;
  }
};

struct MetricWeights {
  double omega0 = 0.85;
  double omega1 = 0.15;
  double kappa = 0.1;

  /// Throws UsageError unless omega0 + omega1 = 1, omega0 >= 0.5, kappa > 0.
  void validate() const;
};

/// Angle (rad) between two spectra. Zero-norm input throws DegenerateError.
double spectral_angle(std::span<const double> x, std::span<const double> y);

/// Same as spectral_angle but returns pi/2 for zero-norm input instead of
/// throwing; for use inside objective functions.
double spectral_angle_or_max(std::span<const double> x,
                             std::span<const double> y) noexcept;

namespace metrics {

/// sqrt(sum of squared differences) / sum(measured), over every scene,
/// pixel and band.
double e_rms(const SpectralStack &measured, const SpectralStack &modelled);

/// Mean spectral angle over every (scene, pixel) pair.
double e_sam(const SpectralStack &measured, const SpectralStack &modelled);

/// Relative RMS of depths that stray more than kappa * mean from the mean.
double e_depth_continuity(std::span<const double> H, double kappa);

/// omega0 * e_rms * e_sam + omega1 * e_depth_continuity; dimensionless.
double e_photic(const SpectralStack &measured, const SpectralStack &modelled,
                std::span<const double> H, const MetricWeights &w);

/// Bottom-unmixing error: relative RMS times mean spectral angle over
/// scenes. Both arguments hold one spectrum per scene, [scene][band].
double e_unmixed_rms(std::span<const double> unmixed,
                     std::span<const double> modelled, std::size_t n_bands);
double e_unmixed_sam(std::span<const double> unmixed,
                     std::span<const double> modelled, std::size_t n_bands);
double e_unmixed(std::span<const double> unmixed,
                 std::span<const double> modelled, std::size_t n_bands);

inline double to_percent(double e) { return 100.0 * e; }

} // namespace metrics
} // namespace sdb
