#pragma once

#include "sdb/empirical_depth.hpp"
#include "sdb/error.hpp"
#include "sdb/scene_stack.hpp"
#include "sdb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

namespace sdb::testing {

/// Silences library warnings for the lifetime of the object.
struct Quiet {
  WarningSink previous = set_warning_sink([](const std::string &) {});
  ~Quiet() { set_warning_sink(previous); }
};

/// Two-scene stack over sand with a fixed water column per scene and a
/// self-consistent particle exponent, on the Table 3 band set.
inline SyntheticTruth two_scene_truth(std::size_t width, std::size_t height,
                                      std::size_t n_scenes = 2) {
  SyntheticTruth t;
  t.width = width;
  t.height = height;
  t.bands = BandSet({443, 483, 561, 655});
  t.library = tables::builtin_bottom_library().select(
      std::vector<std::string>{"sand", "seagrass"});
  for (std::size_t j = 0; j < n_scenes; ++j) {
    SceneMetadata m;
    m.scene_id = "s" + std::to_string(j);
    m.sun_elevation = 55.0 - 10.0 * static_cast<double>(j);
    m.tide_offset = 0.3 * static_cast<double>(j);
    t.scenes.push_back(m);
    WaterColumn w{0.02 + 0.01 * static_cast<double>(j), 0.02, 0.005, 0.0005, 0.015, 1.0};
    w.Y = self_consistent_Y(w, t.bands, Geometry::from_above_surface(m.sun_elevation));
    t.water.push_back(w);
  }
  t.H.assign(t.pixels(), 10.0);
  fill_single_bottom(t, 0, 0.3);
  return t;
}

/// Deep-water statistics of each scene from an optically deep patch.
inline std::vector<DeepWaterStats> deep_stats(const SyntheticTruth &t,
                                              std::size_t size = 6) {
  SyntheticTruth d = t;
  d.width = d.height = size;
  d.H.assign(d.pixels(), 200.0);
  fill_single_bottom(d, 0, 0.3);
  std::vector<std::size_t> all(d.pixels());
  std::iota(all.begin(), all.end(), 0);
  std::vector<DeepWaterStats> out;
  Quiet q;
  for (const auto &s : generate_synthetic(d))
    out.push_back(empirical::deep_water_stats(s, all));
  return out;
}

/// Region fit holding the truth of every pixel of `region`.
inline ModelFit truth_fit(const SyntheticTruth &t, const Region &region) {
  ModelDims dims{t.scenes.size(), region.pixels.size(), t.library.size()};
  ModelFit f(dims);
  for (std::size_t j = 0; j < dims.n_scenes; ++j) {
    f.P[j] = t.water[j].P;
    f.G[j] = t.water[j].G;
    f.X[j] = t.water[j].X;
    f.delta[j] = t.water[j].delta;
  }
  for (std::size_t i = 0; i < dims.n_pixels; ++i) {
    const std::size_t p = region.pixels[i];
    f.H[i] = t.H[p];
    for (std::size_t k = 0; k < dims.n_bottom; ++k) {
      f.b(i, k) = t.B[p * dims.n_bottom + k];
      f.w(i, k) = t.q[p * dims.n_bottom + k];
    }
  }
  return f;
}

/// Brute-force sounding weights.
inline std::vector<double> oracle_weights(std::span<const double> s) {
  std::vector<double> W(s.size(), 0.0), w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      W[i] += std::exp(-(s[i] - s[j]) * (s[i] - s[j]));
  const double M = *std::max_element(W.begin(), W.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    w[i] = std::max(1.0 - W[i] / M, 1e-3);
  return w;
}

// Scene whose subsurface signal above deep water follows the log-linear
// model exactly: r - r_inf = (rho / pi) exp(-k H).
struct LogLinearScene {
  Scene scene, deep;
  std::vector<double> H;
};

inline LogLinearScene log_linear_scene(std::size_t w, std::size_t h) {
  const BandSet bands({443, 483, 561});
  const std::vector<double> rinf{0.006, 0.005, 0.003};
  const std::vector<double> rho{0.25, 0.30, 0.35};
  const std::vector<double> k{0.09, 0.07, 0.12};
  LogLinearScene out{Scene(w, h, bands), Scene(6, 6, bands), {}};
  for (std::size_t p = 0; p < w * h; ++p) {
    const double H = 1.0 + 14.0 * static_cast<double>(p) / static_cast<double>(w * h - 1);
    out.H.push_back(H);
    for (std::size_t b = 0; b < 3; ++b)
      out.scene.set(b, p, static_cast<float>(forward::subsurface_to_surface(
                              rinf[b] + rho[b] / M_PI * std::exp(-k[b] * H), 0.0)));
  }
  for (std::size_t p = 0; p < 36; ++p)
    for (std::size_t b = 0; b < 3; ++b)
      out.deep.set(b, p, static_cast<float>(forward::subsurface_to_surface(rinf[b], 0.0)));
  return out;
}

} // namespace sdb::testing
