#pragma once

#include "sdb/forward_model.hpp"
#include "sdb/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sdb {

/// Ground truth for a synthetic scene stack. Depths are datum-referenced;
/// scene j sees H - tide_offset_j.
struct SyntheticTruth {
  std::size_t width = 0, height = 0;
  BandSet bands;
  BottomLibrary library;
  std::vector<SceneMetadata> scenes;
  std::vector<WaterColumn> water; ///< per scene
  std::vector<double> H;          ///< per pixel
  std::vector<double> B, q;       ///< [pixel][type]
  double noise = 0.0;             ///< uniform half-width, sr^-1
  std::uint64_t seed = 1;

  std::size_t pixels() const { return width * height; }
  void validate() const;
};

/// Forward-models every scene and adds uniform noise in [-noise, noise]
/// per band. Identical truth gives identical scenes.
std::vector<Scene> generate_synthetic(const SyntheticTruth &truth);

/// Depths rising linearly from `shallow` to `deep` along the row-major
/// pixel order, so both columns and rows vary.
std::vector<double> depth_ramp(std::size_t width, std::size_t height,
                               double shallow, double deep);

/// Every pixel covered by bottom type `type` with magnitude B.
void fill_single_bottom(SyntheticTruth &truth, std::size_t type, double B);

/// Y for which the exponent estimated from the deep-water surface spectrum
/// of `w` equals Y itself, so estimation does not bias a synthetic test.
double self_consistent_Y(WaterColumn w, const BandSet &bands,
                         const Geometry &g);

/// Surface reflectance of optically deep water for each scene.
std::vector<Spectrum> deep_water_spectra(const SyntheticTruth &truth);

/// Truth as JSON.
void write_truth(const std::filesystem::path &path, const SyntheticTruth &t);
SyntheticTruth read_truth(const std::filesystem::path &path);

} // namespace sdb
