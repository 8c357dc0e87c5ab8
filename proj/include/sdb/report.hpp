#pragma once

#include "sdb/scene.hpp"

#include <array>
#include <span>
#include <string>

namespace sdb {

/// Agreement between modelled depths and soundings. The regression is
/// model = slope * sounding + intercept.
struct RegressionReport {
  static constexpr std::array<double, 6> kAbsoluteRows{0.25, 0.5, 0.75,
                                                       1.0,  1.5, 2.0};
  static constexpr std::array<double, 6> kRelativeRows{2, 5, 10, 15, 20, 25};

  std::size_t n = 0;
  double r2 = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double mae = 0.0;               ///< m
  double mean_relative = 0.0;     ///< percent
  std::array<double, 6> within_m{}; ///< percent of points, |d| <= row
  std::array<double, 6> within_pct{};

  std::string to_text() const;
  std::string to_json() const;
};

/// Pairs each sounding with the model depth of its pixel; NaN pixels and
/// soundings outside the grid are skipped. Throws UsageError when nothing
/// overlaps. "Within" counts use <= with a 1e-9 relative allowance for
/// rounding in the differences.
RegressionReport regression_report(std::span<const double> model,
                                   std::size_t width, std::size_t height,
                                   const GeoTransform &gt,
                                   const SoundingSet &soundings);

/// Same statistics for already paired values.
RegressionReport regression_report(std::span<const double> model,
                                   std::span<const double> measured);

} // namespace sdb
