#pragma once

#include "sdb/inversion.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace sdb {

/// Parameters retrieved for one pixel, i.e. the centre of its region.
struct PixelResult {
  std::vector<double> P, G, X, delta; ///< per scene
  double H = 0.0;                     ///< datum-referenced m
  std::vector<double> B, q;           ///< per bottom type
  double e_photic = 0.0;              ///< percent
  std::size_t iterations = 0;
  FitSource source = FitSource::Optimizer;
};

/// Centre-pixel parameters of a region fit.
PixelResult center_result(const ModelFit &fit, std::size_t center_slot);

enum class Quality : std::uint8_t { Ok = 0, Failed = 1, NoData = 2 };

/// Fixed-capacity store of recent good fits keyed by their per-scene centre
/// spectra. Oldest entries are overwritten first.
class DynamicLut {
public:
  static constexpr std::size_t kCapacity = 256;
  static constexpr std::size_t kAdaptAfter = 100;
  static constexpr double kAdaptFactor = 1.1;

  struct Entry {
    std::vector<double> key; ///< [scene][band]
    std::vector<double> tides;
    PixelResult result;
    std::uint64_t timestamp = 0;
  };
  struct Match {
    PixelResult result; ///< H already shifted to the query tides
    double angle = 0.0; ///< mean over scenes, rad
    std::uint64_t timestamp = 0;
  };

  DynamicLut(std::size_t n_scenes, std::size_t n_bands,
             double match_threshold = 0.5e-3);

  /// max(1.5, 1.125 N_s) percent.
  static double initial_threshold(std::size_t n_scenes);
  /// 2.5 + 2.5 N_s percent.
  static double threshold_cap(std::size_t n_scenes);

  /// Closest entry when its mean angle is below the match threshold.
  std::optional<Match> query(const Region &region) const;
  std::optional<Match> query(std::span<const double> key,
                             std::span<const double> tides) const;

  /// Stores the result when its error passes the insertion gate. Returns
  /// whether it was stored.
  bool insert(const Region &region, const PixelResult &result);
  bool insert(std::span<const double> key, std::span<const double> tides,
              const PixelResult &result);

  std::size_t size() const { return entries_.size(); }
  const std::deque<Entry> &entries() const { return entries_; }
  double insertion_threshold() const { return insertion_threshold_; }
  double match_threshold() const { return match_threshold_; }

private:
  std::size_t n_scenes_, n_bands_;
  double match_threshold_;
  double insertion_threshold_;
  std::size_t consecutive_failures_ = 0;
  std::uint64_t clock_ = 0;
  std::deque<Entry> entries_;
};

/// Per-pixel output of a scene-stack inversion.
struct FitRaster {
  std::size_t width = 0, height = 0, n_scenes = 0, n_bottom = 0;
  std::vector<PixelResult> pixels;
  std::vector<Quality> quality;
  SceneMetadata meta;

  FitRaster() = default;
  FitRaster(std::size_t w, std::size_t h, std::size_t scenes,
            std::size_t bottom);
  std::size_t size() const { return width * height; }
  /// H per pixel; NaN where the quality flag is not Ok.
  std::vector<double> depth() const;

  /// Layers: H, e_photic, iterations, source, quality, then P, G, X, delta
  /// for each scene, then B and q for each bottom type.
  Raster to_raster(float nodata = -9999.0f) const;
  static FitRaster from_raster(const Raster &r);
};

struct RunReport {
  std::size_t pixels = 0;
  std::size_t nodata = 0;
  std::size_t failed = 0;
  std::size_t lut_hits = 0;
  std::size_t optimizer_runs = 0;
  std::size_t hot_starts = 0;
  std::size_t cold_starts = 0;
  std::size_t ladder_runs = 0;
  std::size_t lut_inserts = 0;
  std::size_t total_iterations = 0;
  double lut_seconds = 0.0;
  double optimizer_seconds = 0.0;
  double final_insertion_threshold = 0.0;
  std::vector<double> Y;

  double hit_rate() const;
  /// Pixels per second on each path; 0 when the path was not taken.
  double lut_throughput() const;
  double optimizer_throughput() const;
  std::string to_json() const;
};

struct StackInputs {
  BottomLibrary library;
  /// Datum-referenced depth prior per pixel (NaN for unknown); empty for none.
  std::vector<double> depth_prior;
  /// One per scene; darkest-pixel statistics are used when empty.
  std::vector<DeepWaterStats> deep_stats;
};

struct StackResult {
  FitRaster fits;
  RunReport report;
};

/// Inverts every pixel of a co-registered scene stack in spectral-angle
/// order, trying the LUT, then a hot start, then a cold start. Failures are
/// flagged per pixel.
StackResult run_scene_stack(std::span<const Scene> scenes,
                            const StackInputs &inputs,
                            const InversionOptions &opt);

/// Region around `center` with nodata neighbours replaced by the centre
/// spectrum. Nullopt when the centre itself is nodata in any scene.
std::optional<Region> valid_region(std::span<const Scene> scenes,
                                   std::size_t center, std::size_t radius);

/// Per-scene particle exponents: the configured value or estimates from
/// the deep-water statistics.
std::vector<double> particle_exponents(std::span<const DeepWaterStats> stats,
                                       const BandSet &bands,
                                       const InversionOptions &opt);

/// Deep statistics per scene, falling back to the darkest pixels.
std::vector<DeepWaterStats> resolve_deep_stats(std::span<const Scene> scenes,
                                               std::span<const DeepWaterStats> given);

} // namespace sdb
