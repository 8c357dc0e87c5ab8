#include "sdb/scene.hpp"

#include "sdb/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sdb {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "raster I/O assumes a little-endian host");

std::array<double, 2> GeoTransform::to_pixel(double x, double y) const {
  const double det = t[1] * t[5] - t[2] * t[4];
  if (det == 0.0)
    throw DataError("geotransform is not invertible");
  const double dx = x - t[0], dy = y - t[3];
  return {(t[5] * dx - t[2] * dy) / det, (-t[4] * dx + t[1] * dy) / det};
}

std::optional<std::size_t> pixel_of(const GeoTransform &gt, std::size_t width,
                                    std::size_t height, double x, double y) {
  const auto [c, r] = gt.to_pixel(x, y);
  const double col = std::floor(c), row = std::floor(r);
  if (col < 0 || row < 0 || col >= static_cast<double>(width) ||
      row >= static_cast<double>(height))
    return std::nullopt;
  return static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col);
}

Raster::Raster(std::size_t w, std::size_t h, std::vector<std::string> names,
               float fill)
    : width(w), height(h), layer_names(std::move(names)),
      data(w * h * layer_names.size(), fill) {}

std::size_t Raster::layer_index(const std::string &name) const {
  for (std::size_t i = 0; i < layer_names.size(); ++i)
    if (layer_names[i] == name)
      return i;
  throw DataError("raster has no layer named '" + name + "'");
}

Scene::Scene(std::size_t width, std::size_t height, BandSet bands,
             SceneMetadata meta)
    : width_(width), height_(height), bands_(std::move(bands)),
      meta_(std::move(meta)), data_(width * height * bands_.size(), 0.0f) {}

Spectrum Scene::spectrum(std::size_t pixel) const {
  Spectrum s;
  s.values.resize(bands_.size());
  for (std::size_t b = 0; b < bands_.size(); ++b)
    s.values[b] = value(b, pixel);
  return s;
}

bool Scene::is_nodata(std::size_t pixel) const {
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    const float v = value(b, pixel);
    if (v == meta_.nodata || !std::isfinite(v))
      return true;
  }
  return false;
}

Raster Scene::to_raster() const {
  Raster r;
  r.width = width_;
  r.height = height_;
  r.meta = meta_;
  r.data = data_;
  if (!bands_.names().empty()) {
    r.layer_names = bands_.names();
  } else {
    for (double c : bands_.centers()) {
      std::ostringstream os;
      os << "rrs_" << c;
      r.layer_names.push_back(os.str());
    }
  }
  return r;
}

Scene Scene::from_raster(Raster r, std::vector<double> band_centers) {
  if (band_centers.size() != r.layers())
    throw DataError("scene needs one band centre per layer: " +
                    std::to_string(band_centers.size()) + " centres, " +
                    std::to_string(r.layers()) + " layers");
  Scene s(r.width, r.height, BandSet(std::move(band_centers), r.layer_names),
          r.meta);
  s.data_ = std::move(r.data);
  return s;
}

std::vector<double> SoundingSet::depths() const {
  std::vector<double> d;
  d.reserve(points.size());
  for (const auto &p : points)
    d.push_back(p.depth);
  return d;
}

namespace io {

namespace {

std::filesystem::path stem_of(const std::filesystem::path &p) {
  auto ext = p.extension().string();
  if (ext == ".bin" || ext == ".json") {
    auto s = p;
    s.replace_extension();
    return s;
  }
  return p;
}

json meta_to_json(const SceneMetadata &m) {
  return json{{"scene_id", m.scene_id},
              {"date", m.date},
              {"sun_elevation", m.sun_elevation},
              {"view_zenith", m.view_zenith},
              {"tide_offset", m.tide_offset},
              {"geotransform", m.geotransform.t},
              {"nodata", m.nodata}};
}

SceneMetadata meta_from_json(const json &j) {
  SceneMetadata m;
  m.scene_id = j.value("scene_id", std::string{});
  m.date = j.value("date", std::string{});
  m.sun_elevation = j.value("sun_elevation", 90.0);
  m.view_zenith = j.value("view_zenith", 0.0);
  m.tide_offset = j.value("tide_offset", 0.0);
  if (j.contains("geotransform"))
    m.geotransform.t = j.at("geotransform").get<std::array<double, 6>>();
  m.nodata = j.value("nodata", -9999.0f);
  if (!(m.sun_elevation > 0.0 && m.sun_elevation <= 90.0))
    throw DataError("sun_elevation must be in (0, 90]");
  if (!m.geotransform.invertible())
    throw DataError("geotransform is not invertible");
  return m;
}

} // namespace

std::filesystem::path binary_path(const std::filesystem::path &path) {
  auto s = stem_of(path);
  s += ".bin";
  return s;
}

std::filesystem::path sidecar_path(const std::filesystem::path &path) {
  auto s = stem_of(path);
  s += ".json";
  return s;
}

void write_raster(const std::filesystem::path &path, const Raster &r,
                  const std::vector<double> &band_centers) {
  if (r.data.size() != r.pixels() * r.layers())
    throw UsageError("raster data length does not match its dimensions");
  json side{{"width", r.width},
            {"height", r.height},
            {"layers", r.layer_names},
            {"data_file", binary_path(path).filename().string()},
            {"dtype", "float32"},
            {"byte_order", "little"},
            {"interleave", "band-sequential"},
            {"metadata", meta_to_json(r.meta)}};
  if (!band_centers.empty())
    side["band_centers"] = band_centers;
  {
    std::ofstream out(sidecar_path(path));
    if (!out)
      throw DataError("cannot write " + sidecar_path(path).string());
    out << side.dump(2) << '\n';
  }
  std::ofstream bin(binary_path(path), std::ios::binary);
  if (!bin)
    throw DataError("cannot write " + binary_path(path).string());
  bin.write(reinterpret_cast<const char *>(r.data.data()),
            static_cast<std::streamsize>(r.data.size() * sizeof(float)));
  if (!bin)
    throw DataError("short write to " + binary_path(path).string());
}

Raster read_raster(const std::filesystem::path &path,
                   std::vector<double> *band_centers) {
  const auto side_path = sidecar_path(path);
  std::ifstream in(side_path);
  if (!in)
    throw DataError("missing sidecar " + side_path.string());
  json side;
  try {
    side = json::parse(in);
  } catch (const json::exception &e) {
    throw DataError("malformed sidecar " + side_path.string() + ": " +
                    e.what());
  }
  Raster r;
  try {
    r.width = side.at("width").get<std::size_t>();
    r.height = side.at("height").get<std::size_t>();
    r.layer_names = side.at("layers").get<std::vector<std::string>>();
    r.meta = meta_from_json(side.value("metadata", json::object()));
    if (band_centers) {
      if (side.contains("band_centers"))
        *band_centers = side.at("band_centers").get<std::vector<double>>();
      else
        band_centers->clear();
    }
  } catch (const json::exception &e) {
    throw DataError("sidecar " + side_path.string() + ": " + e.what());
  }

  const auto bin_path = binary_path(path);
  std::ifstream bin(bin_path, std::ios::binary | std::ios::ate);
  if (!bin)
    throw DataError("missing data file " + bin_path.string());
  const auto actual = static_cast<std::uintmax_t>(bin.tellg());
  const std::uintmax_t expected = r.width * r.height * r.layers() * 4;
  if (actual != expected)
    throw DataError(bin_path.string() + ": size mismatch, expected " +
                    std::to_string(expected) + " bytes but found " +
                    std::to_string(actual));
  bin.seekg(0);
  r.data.resize(r.width * r.height * r.layers());
  bin.read(reinterpret_cast<char *>(r.data.data()),
           static_cast<std::streamsize>(expected));
  if (!bin)
    throw DataError("short read from " + bin_path.string());
  return r;
}

void write_scene(const std::filesystem::path &path, const Scene &s) {
  write_raster(path, s.to_raster(),
               std::vector<double>(s.bands().centers().begin(),
                                   s.bands().centers().end()));
}

Scene read_scene(const std::filesystem::path &path) {
  std::vector<double> centers;
  Raster r = read_raster(path, &centers);
  if (centers.empty())
    throw DataError(sidecar_path(path).string() +
                    ": scene sidecar has no band_centers");
  return Scene::from_raster(std::move(r), std::move(centers));
}

SoundingSet read_soundings(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open soundings file " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ": empty soundings file");
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
      s.pop_back();
    return s;
  };
  if (trim(line) != "x,y,depth_m")
    throw DataError(path.string() + ": expected header 'x,y,depth_m'");
  SoundingSet out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string fx, fy, fd;
    Sounding s;
    try {
      if (!std::getline(ls, fx, ',') || !std::getline(ls, fy, ',') ||
          !std::getline(ls, fd))
        throw std::invalid_argument("columns");
      s.x = std::stod(fx);
      s.y = std::stod(fy);
      s.depth = std::stod(fd);
    } catch (const std::exception &) {
      throw DataError(path.string() + ": row " + std::to_string(row) +
                      ": expected three numeric columns");
    }
    if (!(s.depth > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y))
      throw DataError(path.string() + ": row " + std::to_string(row) +
                      ": depth must be positive");
    out.points.push_back(s);
  }
  return out;
}

void write_soundings(const std::filesystem::path &path, const SoundingSet &s) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "x,y,depth_m\n";
  out.precision(17);
  for (const auto &p : s.points)
    out << p.x << ',' << p.y << ',' << p.depth << '\n';
}

} // namespace io
} // namespace sdb
