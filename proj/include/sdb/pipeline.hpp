#pragma once

#include "sdb/scene_stack.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sdb {

using Combination = std::vector<std::size_t>;

/// Every nonempty subset of {0..n-1} with at most max_size members, ordered
/// by size and then lexicographically.
std::vector<Combination> scene_combinations(std::size_t n_scenes,
                                            std::size_t max_size = 4);

/// One fit raster per scene combination. Depths are datum-referenced.
struct IterationSet {
  std::vector<Combination> combinations;
  std::vector<FitRaster> results;
};

/// Smallest value whose cumulative weight (values ascending) reaches half
/// the total. Throws UsageError on empty input or nonpositive weights.
double weighted_median(std::span<const double> values,
                       std::span<const double> weights);

/// Per-pixel median over the combinations, weighted by scene count when
/// `weighted` (every weight 1 otherwise). NaN where no combination fitted.
std::vector<double> weighted_median_depth(const IterationSet &set,
                                          bool weighted = true);

/// H_aligned = sum c_i a_i H_i^b_i / sum c_i.
struct AlignmentCoefficients {
  std::vector<double> c, a, b;
  double fit_error = 0.0;
  std::size_t soundings_used = 0;
};

double aligned_depth(const AlignmentCoefficients &k,
                     std::span<const double> H);

struct Alignment {
  AlignmentCoefficients coefficients;
  std::vector<double> depth; ///< NaN where any input is missing
};

/// Fits alignment coefficients to the soundings from an all-ones start.
/// Returns nullopt, with a warning, when fewer than 3n soundings fall on
/// pixels where every raster has a positive depth.
std::optional<Alignment> align_depths(
    std::span<const std::vector<double>> rasters, std::size_t width,
    std::size_t height, const GeoTransform &gt, const SoundingSet &soundings,
    const SimplexConfig &cfg);

struct KAverage {
  std::vector<std::vector<double>> per_band; ///< [band][pixel], m^-1
  std::vector<double> minimum;               ///< min over bands, per pixel
};

/// Mean of k = a + b_b over every (combination, member scene) that fitted
/// each pixel. `Y` is indexed by scene.
KAverage average_k(const IterationSet &set, const BandSet &bands,
                   std::span<const double> Y, double S,
                   const OpticalTables &tables = OpticalTables::builtin());

/// NaN-aware 3x3 median filter with edge clamping.
std::vector<double> median_filter3(std::span<const double> values,
                                   std::size_t width, std::size_t height);

/// Bottom composition of one pixel. `fractions` are the effective shares
/// B_i q_i / sum B_j q_j and `albedo` the common scale
/// sum B_j q_j / sum q_j; the mixed albedo equals albedo * sum f_i rho_i.
struct BottomFit {
  std::vector<double> B, q;
  std::vector<double> fractions;
  double albedo = 0.0;
  double e_unmixed = 0.0;
  double e_rms = 0.0;
};

struct UnmixOptions {
  ParameterRanges ranges;
  SimplexConfig simplex{.max_iterations = 20000,
                        .f_tolerance = 1e-15,
                        .x_tolerance = 1e-10,
                        .restarts = 2,
                        .initial_scale = 0.1,
                        .rng_seed = 1};
  /// Relative slack of the first-stage error allowed in the second stage.
  double stage_two_slack = 1e-3;
};

/// Fits B and q to bottom albedo spectra, one per scene ([scene][band]).
/// Stage one minimises e_unmixed; stage two minimises its RMS factor while
/// keeping e_unmixed within the slack of stage one, which fixes the
/// amplitude that the angle factor cannot see.
BottomFit fit_bottom(std::span<const double> unmixed, std::size_t n_bands,
                     const BandOptics &optics, const UnmixOptions &opt);

struct UnmixResult {
  std::size_t width = 0, height = 0, n_bottom = 0;
  std::vector<BottomFit> pixels;
  std::vector<Quality> quality;
};

/// Fixed per-scene water column rasters ([scene][pixel]) used by unmixing.
struct FixedColumn {
  std::vector<std::vector<double>> P, G, X, delta;
};

/// Per-scene water column averaged over the combinations containing each
/// scene, then 3x3 median filtered.
FixedColumn fixed_water_column(const IterationSet &set, std::size_t n_scenes,
                               std::size_t width, std::size_t height);

/// Bottom albedo per scene and band implied by the fixed column and depth.
/// Nullopt when any value is not finite.
std::optional<std::vector<double>> unmixed_albedo(
    std::span<const Scene> scenes, const FixedColumn &col,
    std::span<const double> Y, double S, double H, std::size_t pixel);

UnmixResult unmix_bottom(std::span<const Scene> scenes, const FixedColumn &col,
                         std::span<const double> H, std::span<const double> Y,
                         double S, const BottomLibrary &library,
                         const UnmixOptions &opt);

struct BottomSearch {
  std::vector<std::size_t> members; ///< library indices
  BottomFit fit;
  std::size_t candidates = 0;
  std::vector<double> candidate_errors; ///< in evaluation order
};

/// Fits every single library member, then every unordered pair, and keeps
/// the lowest e_unmixed. A pair must beat the best so far by more than a
/// relative 1e-6 so that exact single-member fits are not displaced by
/// pairs that merely reproduce them.
BottomSearch exhaustive_bottom_search(std::span<const double> unmixed,
                                      std::size_t n_bands,
                                      const BandSet &bands,
                                      const BottomLibrary &library,
                                      const UnmixOptions &opt);

struct DepthErrorConfig {
  std::size_t n_trials = 20;
  double noise_scale = 1.0; ///< multiplies each band's deep-water stddev
  double alpha = 1.0;       ///< scale for external uncertainties
  std::uint64_t rng_seed = 1;
  std::size_t jobs = 1;
};

/// Per-pixel standard deviation of H over perturbed re-inversions, times
/// alpha. Each trial adds uniform noise in +-noise_scale * sigma_band to
/// every band and re-fits every pixel from the baseline fit without the
/// LUT. NaN where the baseline failed.
std::vector<double> depth_error_estimate(std::span<const Scene> scenes,
                                         const StackInputs &inputs,
                                         const InversionOptions &opt,
                                         const FitRaster &baseline,
                                         const DepthErrorConfig &cfg);

/// H + tide + datum_offset; NaN stays NaN.
std::vector<double> tide_correct(std::span<const double> H, double tide,
                                 double datum_offset);

struct PipelineOptions {
  InversionOptions inversion;
  std::size_t max_combination = 4;
  bool weighted_median = true;
  bool unmix = true;
  bool align = true;
  double datum_offset = 0.0;
  UnmixOptions unmixing;
  std::size_t jobs = 1; ///< combinations run concurrently
};

struct PipelineResult {
  IterationSet iterations;
  std::vector<RunReport> reports;
  std::vector<double> depth; ///< median (or aligned) plus datum offset
  std::optional<Alignment> alignment;
  KAverage k;
  std::optional<UnmixResult> bottom;
  std::vector<double> Y;
};

PipelineResult run_pipeline(std::span<const Scene> scenes,
                            const StackInputs &inputs,
                            const SoundingSet &soundings,
                            const PipelineOptions &opt);

} // namespace sdb
