#pragma once

#include "sdb/spectral.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sdb {

/// GDAL-style affine transform: x = t0 + col t1 + row t2,
/// y = t3 + col t4 + row t5.
struct GeoTransform {
  std::array<double, 6> t{0.0, 1.0, 0.0, 0.0, 0.0, 1.0};

  std::array<double, 2> to_world(double col, double row) const {
    return {t[0] + col * t[1] + row * t[2], t[3] + col * t[4] + row * t[5]};
  }
  /// Fractional (col, row) of a world coordinate. Throws DataError when the
  /// transform is singular.
  std::array<double, 2> to_pixel(double x, double y) const;
  bool invertible() const { return t[1] * t[5] - t[2] * t[4] != 0.0; }
};

struct SceneMetadata {
  std::string scene_id;
  std::string date; ///< ISO-8601
  double sun_elevation = 90.0; ///< degrees above the horizon
  double view_zenith = 0.0;    ///< degrees from nadir, above the surface
  double tide_offset = 0.0;    ///< m; instantaneous depth + offset = datum depth
  GeoTransform geotransform;
  float nodata = -9999.0f;
};

/// Row-major pixel grid of `layers` float32 planes stored band-sequentially.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::string> layer_names;
  std::vector<float> data;
  SceneMetadata meta;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, std::vector<std::string> names,
         float fill = 0.0f);

  std::size_t pixels() const { return width * height; }
  std::size_t layers() const { return layer_names.size(); }
  float &at(std::size_t layer, std::size_t pixel) {
    return data[layer * pixels() + pixel];
  }
  float at(std::size_t layer, std::size_t pixel) const {
    return data[layer * pixels() + pixel];
  }
  std::size_t layer_index(const std::string &name) const;
};

/// A multispectral surface reflectance image (sr^-1) with band centres.
class Scene {
public:
  Scene() = default;
  Scene(std::size_t width, std::size_t height, BandSet bands,
        SceneMetadata meta = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixels() const { return width_ * height_; }
  const BandSet &bands() const { return bands_; }
  const SceneMetadata &meta() const { return meta_; }
  SceneMetadata &meta() { return meta_; }

  float value(std::size_t band, std::size_t pixel) const {
    return data_[band * pixels() + pixel];
  }
  void set(std::size_t band, std::size_t pixel, float v) {
    data_[band * pixels() + pixel] = v;
  }
  Spectrum spectrum(std::size_t pixel) const;
  bool is_nodata(std::size_t pixel) const;

  std::vector<float> &data() { return data_; }
  const std::vector<float> &data() const { return data_; }

  Raster to_raster() const;
  /// Throws DataError when the raster lacks band centres.
  static Scene from_raster(Raster r, std::vector<double> band_centers);

private:
  std::size_t width_ = 0, height_ = 0;
  BandSet bands_;
  SceneMetadata meta_;
  std::vector<float> data_;
};

struct Sounding {
  double x = 0;
  double y = 0;
  double depth = 0; ///< m, positive down
};

struct SoundingSet {
  std::vector<Sounding> points;
  std::vector<double> depths() const;
};

namespace io {

/// Files are `<stem>.bin` (float32 little-endian, band-sequential) and
/// `<stem>.json` (dimensions, layer names, band centres, metadata). `path`
/// may name either file or the bare stem.
void write_raster(const std::filesystem::path &path, const Raster &r,
                  const std::vector<double> &band_centers = {});
Raster read_raster(const std::filesystem::path &path,
                   std::vector<double> *band_centers = nullptr);

void write_scene(const std::filesystem::path &path, const Scene &s);
Scene read_scene(const std::filesystem::path &path);

/// CSV with header `x,y,depth_m`. Errors name the offending row.
SoundingSet read_soundings(const std::filesystem::path &path);
void write_soundings(const std::filesystem::path &path, const SoundingSet &s);

std::filesystem::path binary_path(const std::filesystem::path &path);
std::filesystem::path sidecar_path(const std::filesystem::path &path);

} // namespace io

/// Pixel index of a world coordinate, if it falls inside the grid.
std::optional<std::size_t> pixel_of(const GeoTransform &gt, std::size_t width,
                                    std::size_t height, double x, double y);

} // namespace sdb
