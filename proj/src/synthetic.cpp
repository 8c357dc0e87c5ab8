#include "sdb/synthetic.hpp"

#include "sdb/error.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace sdb {

using nlohmann::json;

namespace {

constexpr double kDeepH = 200.0;

} // namespace

void SyntheticTruth::validate() const {
  const std::size_t n = pixels();
  if (n == 0 || bands.size() == 0 || library.size() == 0)
    throw UsageError("synthetic truth needs pixels, bands and a bottom library");
  if (scenes.empty() || water.size() != scenes.size())
    throw UsageError("synthetic truth needs one water column per scene");
  if (H.size() != n || B.size() != n * library.size() ||
      q.size() != n * library.size())
    throw UsageError("synthetic truth rasters do not match the grid");
  if (!(noise >= 0.0))
    throw UsageError("noise amplitude must be nonnegative");
}

std::vector<Scene> generate_synthetic(const SyntheticTruth &t) {
  t.validate();
  const std::size_t nt = t.library.size();
  std::mt19937_64 rng(t.seed);
  std::uniform_real_distribution<double> noise(-t.noise, t.noise);
  std::vector<Scene> out;
  for (std::size_t j = 0; j < t.scenes.size(); ++j) {
    Scene s(t.width, t.height, t.bands, t.scenes[j]);
    const auto g = Geometry::from_above_surface(t.scenes[j].sun_elevation,
                                                t.scenes[j].view_zenith);
    for (std::size_t p = 0; p < t.pixels(); ++p) {
      BottomState bottom{
          {t.B.begin() + p * nt, t.B.begin() + (p + 1) * nt},
          {t.q.begin() + p * nt, t.q.begin() + (p + 1) * nt}};
      const double H = t.H[p] - t.scenes[j].tide_offset;
      if (!(H >= 0.0))
        throw DomainError("pixel " + std::to_string(p) +
                          " lies above the water in scene " + std::to_string(j));
      for (std::size_t b = 0; b < t.bands.size(); ++b) {
        const double r = forward::subsurface_rrs(t.water[j], bottom, H, g,
                                                 t.library, t.bands.center(b));
        double R = forward::subsurface_to_surface(r, t.water[j].delta);
        if (t.noise > 0.0)
          R += noise(rng);
        if (!std::isfinite(R))
          throw DomainError("non-finite reflectance at pixel " +
                            std::to_string(p));
        s.set(b, p, static_cast<float>(R));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> depth_ramp(std::size_t width, std::size_t height,
                               double shallow, double deep) {
  const std::size_t n = width * height;
  std::vector<double> H(n, shallow);
  for (std::size_t p = 0; p < n && n > 1; ++p)
    H[p] = shallow + (deep - shallow) * static_cast<double>(p) /
                         static_cast<double>(n - 1);
  return H;
}

void fill_single_bottom(SyntheticTruth &t, std::size_t type, double B) {
  const std::size_t nt = t.library.size();
  if (type >= nt)
    throw UsageError("bottom type outside the library");
  t.B.assign(t.pixels() * nt, 0.0);
  t.q.assign(t.pixels() * nt, 0.0);
  for (std::size_t p = 0; p < t.pixels(); ++p) {
    t.B[p * nt + type] = B;
    t.q[p * nt + type] = 1.0;
  }
}

namespace {

Spectrum deep_surface(const WaterColumn &w, const BandSet &bands,
                      const Geometry &g) {
  const BottomLibrary dark(
      {LookupCurve("dark", {300.0, 1000.0}, {1.0, 1.0})});
  const BottomState none{{0.0}, {1.0}};
  Spectrum s;
  for (double l : bands.centers())
    s.values.push_back(forward::subsurface_to_surface(
        forward::subsurface_rrs(w, none, kDeepH, g, dark, l), w.delta));
  return s;
}

} // namespace

double self_consistent_Y(WaterColumn w, const BandSet &bands,
                         const Geometry &g) {
  auto gap = [&](double Y) {
    w.Y = Y;
    return forward::estimate_Y(deep_surface(w, bands, g), bands) - Y;
  };
  double lo = -5.0, hi = 3.44;
  double glo = gap(lo), ghi = gap(hi);
  if (glo * ghi > 0.0)
    throw NumericalError("no self-consistent particle exponent in [-5, 3.44]");
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = gap(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<Spectrum> deep_water_spectra(const SyntheticTruth &t) {
  std::vector<Spectrum> out;
  for (std::size_t j = 0; j < t.scenes.size(); ++j)
    out.push_back(deep_surface(
        t.water[j], t.bands,
        Geometry::from_above_surface(t.scenes[j].sun_elevation,
                                     t.scenes[j].view_zenith)));
  return out;
}

void write_truth(const std::filesystem::path &path, const SyntheticTruth &t) {
  json j;
  j["width"] = t.width;
  j["height"] = t.height;
  j["band_centers"] = std::vector<double>(t.bands.centers().begin(),
                                          t.bands.centers().end());
  j["bottom_types"] = t.library.names();
  j["noise"] = t.noise;
  j["seed"] = t.seed;
  j["H"] = t.H;
  j["B"] = t.B;
  j["q"] = t.q;
  for (std::size_t s = 0; s < t.scenes.size(); ++s) {
    const auto &w = t.water[s];
    j["scenes"].push_back({{"scene_id", t.scenes[s].scene_id},
                           {"sun_elevation", t.scenes[s].sun_elevation},
                           {"view_zenith", t.scenes[s].view_zenith},
                           {"tide_offset", t.scenes[s].tide_offset},
                           {"P", w.P},
                           {"G", w.G},
                           {"X", w.X},
                           {"delta", w.delta},
                           {"S", w.S},
                           {"Y", w.Y}});
  }
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

SyntheticTruth read_truth(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + path.string());
  SyntheticTruth t;
  try {
    const json j = json::parse(in);
    t.width = j.at("width");
    t.height = j.at("height");
    t.bands = BandSet(j.at("band_centers").get<std::vector<double>>());
    t.library = tables::builtin_bottom_library().select(
        j.at("bottom_types").get<std::vector<std::string>>());
    t.noise = j.at("noise");
    t.seed = j.at("seed");
    t.H = j.at("H").get<std::vector<double>>();
    t.B = j.at("B").get<std::vector<double>>();
    t.q = j.at("q").get<std::vector<double>>();
    for (const auto &s : j.at("scenes")) {
      SceneMetadata m;
      m.scene_id = s.value("scene_id", std::string{});
      m.sun_elevation = s.at("sun_elevation");
      m.view_zenith = s.at("view_zenith");
      m.tide_offset = s.at("tide_offset");
      t.scenes.push_back(m);
      t.water.push_back(WaterColumn{s.at("P"), s.at("G"), s.at("X"),
                                    s.at("delta"), s.at("S"), s.at("Y")});
    }
  } catch (const json::exception &e) {
    throw DataError(path.string() + ": " + e.what());
  }
  t.validate();
  return t;
}

} // namespace sdb
