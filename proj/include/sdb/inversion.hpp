#pragma once

#include "sdb/empirical_depth.hpp"
#include "sdb/forward_model.hpp"
#include "sdb/metrics.hpp"
#include "sdb/optimizer.hpp"
#include "sdb/scene.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sdb {

/// Problem size of one region inversion.
struct ModelDims {
  std::size_t n_scenes = 1;
  std::size_t n_pixels = 1;
  std::size_t n_bottom = 2;

  /// N_r + 2 N_b N_r + 4 N_s.
  std::size_t total() const {
    return n_pixels + 2 * n_bottom * n_pixels + 4 * n_scenes;
  }
  bool operator==(const ModelDims &) const = default;
};

enum class FitSource { Optimizer, Lut };

/// Every parameter of one region inversion.
///
/// Packed layout (see pack): for each scene s the block [P_s, G_s, X_s,
/// delta_s]; then H for each pixel; then B for each pixel as N_b
/// consecutive values; then q in the same arrangement as B.
struct ModelFit {
  ModelDims dims;
  std::vector<double> P, G, X, delta; ///< per scene
  std::vector<double> H;              ///< per pixel, datum-referenced m
  std::vector<double> B, q;           ///< [pixel][type]
  double e_photic = 0.0;              ///< percent
  std::size_t iterations = 0;
  FitSource source = FitSource::Optimizer;

  explicit ModelFit(ModelDims d = {});
  double &b(std::size_t pixel, std::size_t type) {
    return B[pixel * dims.n_bottom + type];
  }
  double &w(std::size_t pixel, std::size_t type) {
    return q[pixel * dims.n_bottom + type];
  }
};

std::vector<double> pack(const ModelFit &fit);
/// Throws UsageError when v.size() != dims.total().
ModelFit unpack(std::span<const double> v, const ModelDims &dims);

/// Parameter ranges used to build the optimiser's box.
struct ParameterRanges {
  double P_min = 1e-3, P_max = 0.5;
  double G_min = 1e-3, G_max = 1.0;
  double X_min = 1e-4, X_max = 0.25;
  double delta_min = -0.005, delta_max = 0.01;
  double H_min = 0.01, H_max = 35.0;
  double B_min = 0.0, B_max = 0.6;
  double q_min = 1e-3, q_max = 100.0;

  Bounds bounds(const ModelDims &dims) const;
  void validate() const;
};

/// A (2r+1)^2 neighbourhood observed in every scene of a stack.
struct Region {
  std::size_t center = 0;
  std::vector<std::size_t> pixels; ///< raster indices, centre in the middle
  SpectralStack measured;          ///< [scene][pixel][band], surface rrs
  std::vector<Geometry> geometry;  ///< per scene
  std::vector<double> tides;       ///< per scene

  std::size_t center_slot() const { return pixels.size() / 2; }
  std::span<const double> center_spectrum(std::size_t scene) const {
    return measured.spectrum(scene, center_slot());
  }
};

/// Neighbourhood of `center` with radius r; indices beyond the raster edge
/// are clamped to the nearest edge pixel.
Region make_region(std::span<const Scene> scenes, std::size_t center,
                   std::size_t radius);

/// Fixed per-scene optics shared by every region of a scene stack.
struct StackOptics {
  BandSet bands;
  BottomLibrary library;
  BandOptics optics;
  std::vector<double> Y; ///< per scene
  double S = forward::kDefaultGelbstoffSlope;

  StackOptics(BandSet bands, BottomLibrary library, std::vector<double> Y,
              double S = forward::kDefaultGelbstoffSlope,
              const OpticalTables &tables = OpticalTables::builtin());
};

struct InversionOptions {
  ParameterRanges ranges;
  MetricWeights weights;
  SimplexConfig simplex;
  std::size_t region_radius = 1;
  std::size_t n_bottom = 2;
  bool use_lut = true;
  double lut_match_threshold = 0.5e-3;  ///< rad
  double hot_start_threshold = 2e-3;    ///< rad
  std::optional<double> particle_exponent; ///< fixed Y; estimated when empty
  double gelbstoff_slope = forward::kDefaultGelbstoffSlope;
  std::size_t jobs = 1; ///< threads for depth-ladder starts
  /// Iteration budget of each ladder start before the best one is refined
  /// with the full simplex budget; 0 runs every start to completion.
  std::size_t ladder_screen_iterations = 3000;

  void validate() const;
};

/// Objective of one region: e_photic (dimensionless) of a packed vector.
class RegionObjective {
public:
  RegionObjective(const Region &region, const StackOptics &optics,
                  const MetricWeights &weights, ModelDims dims);

  double operator()(std::span<const double> v) const;
  /// Modelled surface reflectance for a packed vector.
  SpectralStack model(std::span<const double> v) const;
  const ModelDims &dims() const { return dims_; }

private:
  const Region &region_;
  const StackOptics &optics_;
  MetricWeights weights_;
  ModelDims dims_;
};

/// Cold-start parameters of a region. H is taken from `depth_prior` when
/// given (one value per region pixel, NaN for unknown) and otherwise left at
/// the first ladder depth with `has_depth` false.
struct StartPoint {
  ModelFit fit;
  bool has_depth = false;
};

StartPoint cold_start(const Region &region, const StackOptics &optics,
                      const InversionOptions &opt,
                      std::span<const double> depth_prior = {});

/// True when the mean over scenes of the centre-spectrum angle is below
/// the threshold.
bool should_hot_start(const Region &current, const Region &previous,
                      double threshold);

/// Minimises e_photic from `start`. Without a depth the 17-depth ladder is
/// run and the best result kept: every start gets the screening budget and
/// the winner is continued with the full budget.
ModelFit invert_region(const Region &region, const StartPoint &start,
                       const StackOptics &optics, const InversionOptions &opt);

/// Indices of the pixels sorted by ascending angle between their subsurface
/// spectrum (first scene) and the deep-water mean. Stable.
std::vector<std::size_t> order_pixels(std::span<const Scene> scenes,
                                      const DeepWaterStats &stats);

/// Y per scene from its deep-water surface mean; 1 when degenerate.
std::vector<double> estimate_particle_exponents(
    std::span<const DeepWaterStats> stats, const BandSet &bands);

/// Deep-water statistics from the darkest 1% of a scene's valid pixels
/// (at least one), ranked by summed reflectance.
DeepWaterStats darkest_pixel_stats(const Scene &scene);

} // namespace sdb
