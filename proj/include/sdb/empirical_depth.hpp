#pragma once

#include "sdb/optimizer.hpp"
#include "sdb/scene.hpp"
#include "sdb/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sdb {

/// Optically deep water statistics for one scene. `mean`/`stddev` are
/// subsurface reflectance; the surface_ variants are the raw scene values.
struct DeepWaterStats {
  Spectrum mean;
  Spectrum stddev;
  Spectrum surface_mean;
  Spectrum surface_stddev;
  std::size_t pixel_count = 0;
};

/// Intercept h[0] followed by one coefficient per band.
struct EmpiricalCoefficients {
  std::vector<double> h;
  double fit_error = 0.0;
  std::size_t soundings_used = 0;
};

namespace empirical {

inline constexpr double kWeightFloor = 1e-3;
inline constexpr std::size_t kRecommendedDeepPixels = 30;

/// Throws UsageError on an empty mask; warns below 30 pixels.
DeepWaterStats deep_water_stats(const Scene &scene,
                                std::span<const std::size_t> deep_pixels);
/// Mask form: nonzero entries mark deep water.
DeepWaterStats deep_water_stats_from_mask(const Scene &scene,
                                          std::span<const std::uint8_t> mask);

/// log(r_blue - r_inf_blue) / log(r_green - r_inf_green). Throws
/// DomainError when a log argument is not positive or the denominator is 0.
double attenuation_ratio(const Spectrum &r, const Spectrum &r_inf,
                         std::size_t blue, std::size_t green);

/// w_i = 1 - W_i / max W with W_i = sum_j exp(-(s_i - s_j)^2), floored at
/// kWeightFloor. Throws UsageError for fewer than two depths.
std::vector<double> sounding_weights(std::span<const double> depths);

/// Weights used in a fit: sounding_weights, or uniform ones when every
/// weight sits on the floor.
std::vector<double> fit_weights(std::span<const double> depths);

/// sqrt(sum w ((H - s)/s)^2 / sum w).
double weighted_relative_rms(std::span<const double> predicted,
                             std::span<const double> soundings,
                             std::span<const double> weights);

/// Attenuation (m^-1) per band interpolated between two reference water
/// types by the blue/green attenuation ratio. Used only to seed the fit.
std::vector<double> reference_attenuation(double blue_green_ratio,
                                          const BandSet &bands);

/// Subsurface log signal above deep water per band, or nullopt when any
/// band is at or below the deep-water mean.
std::optional<std::vector<double>> log_signal(const Spectrum &surface_rrs,
                                              const DeepWaterStats &stats);

EmpiricalCoefficients fit_empirical(const Scene &scene,
                                    const DeepWaterStats &stats,
                                    const SoundingSet &soundings,
                                    const SimplexConfig &cfg);

/// h0 - sum h_i log(r_i - r_inf_i); nullopt when a log argument is not
/// positive.
std::optional<double> empirical_depth(const EmpiricalCoefficients &c,
                                      const Spectrum &surface_rrs,
                                      const DeepWaterStats &stats);

/// Per-pixel depths, NaN where no estimate exists.
std::vector<double> predict_depths(const EmpiricalCoefficients &c,
                                   const Scene &scene,
                                   const DeepWaterStats &stats);

enum class Synthesis { Median, InverseErrorMean };

/// Combines co-registered per-scene depth rasters after adding each scene's
/// tide offset. NaN entries are skipped; a pixel with no valid depth is NaN.
std::vector<double> synthesize_depths(
    std::span<const std::vector<double>> per_scene,
    std::span<const double> fit_errors, std::span<const double> tides,
    Synthesis mode = Synthesis::Median);

} // namespace empirical
} // namespace sdb
