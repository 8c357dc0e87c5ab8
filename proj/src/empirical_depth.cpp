#include "sdb/empirical_depth.hpp"

#include "sdb/error.hpp"
#include "sdb/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace sdb::empirical {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Diffuse attenuation of two reference water types (clear oceanic and
// turbid coastal), m^-1, at 50 nm steps from 400 to 750 nm.
const LookupCurve &oceanic_attenuation() {
  static const LookupCurve c(
      "oceanic", {400, 450, 500, 550, 600, 650, 700, 750},
      {0.028, 0.019, 0.027, 0.063, 0.235, 0.36, 0.56, 2.6});
  return c;
}

const LookupCurve &coastal_attenuation() {
  static const LookupCurve c(
      "coastal", {400, 450, 500, 550, 600, 650, 700, 750},
      {0.29, 0.14, 0.089, 0.083, 0.26, 0.40, 0.63, 2.7});
  return c;
}

std::size_t blue_band(const BandSet &b) { return b.nearest(480.0); }
std::size_t green_band(const BandSet &b) { return b.nearest(560.0); }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

DeepWaterStats deep_water_stats(const Scene &scene,
                                std::span<const std::size_t> deep_pixels) {
  const std::size_t nb = scene.bands().size();
  std::vector<std::size_t> valid;
  for (auto p : deep_pixels) {
    if (p >= scene.pixels())
      throw UsageError("deep-water pixel index out of range");
    if (!scene.is_nodata(p))
      valid.push_back(p);
  }
  if (valid.empty())
    throw UsageError("deep-water mask selects no valid pixels");
  if (valid.size() < kRecommendedDeepPixels)
    warn("deep-water statistics from only " + std::to_string(valid.size()) +
         " pixels");

  DeepWaterStats st;
  st.pixel_count = valid.size();
  auto accumulate = [&](bool subsurface, Spectrum &mean, Spectrum &sd) {
    mean.values.assign(nb, 0.0);
    sd.values.assign(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      double s = 0.0;
      for (auto p : valid) {
        const double R = scene.value(b, p);
        s += subsurface ? forward::surface_to_subsurface(R, 0.0) : R;
      }
      const double m = s / static_cast<double>(valid.size());
      double ss = 0.0;
      for (auto p : valid) {
        const double R = scene.value(b, p);
        const double v = subsurface ? forward::surface_to_subsurface(R, 0.0) : R;
        ss += (v - m) * (v - m);
      }
      mean[b] = m;
      sd[b] = std::sqrt(ss / static_cast<double>(valid.size()));
    }
  };
  accumulate(true, st.mean, st.stddev);
  accumulate(false, st.surface_mean, st.surface_stddev);
  return st;
}

DeepWaterStats deep_water_stats_from_mask(const Scene &scene,
                                          std::span<const std::uint8_t> mask) {
  if (mask.size() != scene.pixels())
    throw UsageError("deep-water mask size does not match the scene");
  std::vector<std::size_t> px;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i])
      px.push_back(i);
  return deep_water_stats(scene, px);
}

double attenuation_ratio(const Spectrum &r, const Spectrum &r_inf,
                         std::size_t blue, std::size_t green) {
  const double db = r[blue] - r_inf[blue];
  const double dg = r[green] - r_inf[green];
  if (!(db > 0.0) || !(dg > 0.0))
    throw DomainError("signal at or below deep water in the blue or green band");
  const double den = std::log(dg);
  if (den == 0.0)
    throw DomainError("green log signal is zero");
  return std::log(db) / den;
}

std::vector<double> sounding_weights(std::span<const double> depths) {
  const std::size_t n = depths.size();
  if (n < 2)
    throw UsageError("sounding weights need at least two soundings");
  std::vector<double> W(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = depths[i] - depths[j];
      W[i] += std::exp(-d * d);
    }
  const double M = *std::max_element(W.begin(), W.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::max(1.0 - W[i] / M, kWeightFloor);
  return w;
}

std::vector<double> fit_weights(std::span<const double> depths) {
  auto w = sounding_weights(depths);
  if (std::all_of(w.begin(), w.end(),
                  [](double x) { return x <= kWeightFloor; }))
    std::fill(w.begin(), w.end(), 1.0);
  return w;
}

double weighted_relative_rms(std::span<const double> predicted,
                             std::span<const double> soundings,
                             std::span<const double> weights) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < soundings.size(); ++i) {
    const double rel = (predicted[i] - soundings[i]) / soundings[i];
    num += weights[i] * rel * rel;
    den += weights[i];
  }
  return std::sqrt(num / den);
}

std::vector<double> reference_attenuation(double blue_green_ratio,
                                          const BandSet &bands) {
  const auto &oc = oceanic_attenuation();
  const auto &co = coastal_attenuation();
  const double lb = bands.center(blue_band(bands));
  const double lg = bands.center(green_band(bands));
  const double r_oc = oc.value_at(std::clamp(lb, 400.0, 750.0)) /
                      oc.value_at(std::clamp(lg, 400.0, 750.0));
  const double r_co = co.value_at(std::clamp(lb, 400.0, 750.0)) /
                      co.value_at(std::clamp(lg, 400.0, 750.0));
  const double t = std::clamp((blue_green_ratio - r_oc) / (r_co - r_oc), 0.0, 1.0);
  std::vector<double> k;
  for (double l : bands.centers()) {
    const double lc = std::clamp(l, 400.0, 750.0);
    k.push_back((1.0 - t) * oc.value_at(lc) + t * co.value_at(lc));
  }
  return k;
}

std::optional<std::vector<double>> log_signal(const Spectrum &surface_rrs,
                                              const DeepWaterStats &stats) {
  std::vector<double> x(surface_rrs.size());
  for (std::size_t b = 0; b < surface_rrs.size(); ++b) {
    const double d =
        forward::surface_to_subsurface(surface_rrs[b], 0.0) - stats.mean[b];
    if (!(d > 0.0) || !std::isfinite(d))
      return std::nullopt;
    x[b] = std::log(d);
  }
  return x;
}

EmpiricalCoefficients fit_empirical(const Scene &scene,
                                    const DeepWaterStats &stats,
                                    const SoundingSet &soundings,
                                    const SimplexConfig &cfg) {
  const std::size_t nb = scene.bands().size();
  std::vector<std::vector<double>> features;
  std::vector<double> depths;
  for (const auto &s : soundings.points) {
    const auto px = pixel_of(scene.meta().geotransform, scene.width(),
                             scene.height(), s.x, s.y);
    if (!px || scene.is_nodata(*px))
      continue;
    auto x = log_signal(scene.spectrum(*px), stats);
    if (!x)
      continue;
    features.push_back(std::move(*x));
    depths.push_back(s.depth);
  }
  if (depths.size() < nb + 2)
    throw NumericalError("empirical fit needs at least " +
                         std::to_string(nb + 2) + " usable soundings, found " +
                         std::to_string(depths.size()));
  const auto weights = fit_weights(depths);

  // Seed from the reference attenuation: two-way path ~2.2 k, equal share
  // of the depth per band, and a bright-sand intercept.
  std::vector<double> ratios;
  const std::size_t blue = blue_band(scene.bands()),
                    green = green_band(scene.bands());
  for (const auto &x : features)
    if (x[green] != 0.0)
      ratios.push_back(x[blue] / x[green]);
  const double ratio = ratios.empty() ? 1.0 : median_of(ratios);
  const auto k = reference_attenuation(ratio, scene.bands());
  const double log_albedo = std::log(0.3 / std::numbers::pi);

  Bounds bounds;
  bounds.lower.assign(nb + 1, -200.0);
  bounds.upper.assign(nb + 1, 200.0);
  bounds.lower[0] = -1000.0;
  bounds.upper[0] = 1000.0;

  auto seed_from = [&](const std::vector<double> &share) {
    std::vector<double> h(nb + 1, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      h[b + 1] = std::clamp(share[b] / (2.2 * k[b]), -199.0, 199.0);
      h[0] += h[b + 1] * log_albedo;
    }
    h[0] = std::clamp(h[0], -999.0, 999.0);
    return h;
  };
  std::vector<std::vector<double>> starts;
  starts.push_back(seed_from(std::vector<double>(nb, 1.0 / static_cast<double>(nb))));
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<double> share(nb, 0.0);
    share[b] = 1.0;
    starts.push_back(seed_from(share));
  }

  std::vector<double> pred(depths.size());
  auto objective = [&](std::span<const double> h) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      double H = h[0];
      for (std::size_t b = 0; b < nb; ++b)
        H -= h[b + 1] * features[i][b];
      pred[i] = H;
    }
    return weighted_relative_rms(pred, depths, weights);
  };
  const auto best = multi_start_minimize(objective, starts, bounds, cfg);
  return {best.x, best.f, depths.size()};
}

std::optional<double> empirical_depth(const EmpiricalCoefficients &c,
                                      const Spectrum &surface_rrs,
                                      const DeepWaterStats &stats) {
  if (c.h.size() != surface_rrs.size() + 1)
    throw UsageError("coefficient count does not match the band count");
  const auto x = log_signal(surface_rrs, stats);
  if (!x)
    return std::nullopt;
  double H = c.h[0];
  for (std::size_t b = 0; b < x->size(); ++b)
    H -= c.h[b + 1] * (*x)[b];
  return H;
}

std::vector<double> predict_depths(const EmpiricalCoefficients &c,
                                   const Scene &scene,
                                   const DeepWaterStats &stats) {
  std::vector<double> out(scene.pixels(), kNaN);
  for (std::size_t p = 0; p < scene.pixels(); ++p) {
    if (scene.is_nodata(p))
      continue;
    if (auto h = empirical_depth(c, scene.spectrum(p), stats))
      out[p] = *h;
  }
  return out;
}

std::vector<double> synthesize_depths(
    std::span<const std::vector<double>> per_scene,
    std::span<const double> fit_errors, std::span<const double> tides,
    Synthesis mode) {
  if (per_scene.empty())
    throw UsageError("no depth rasters to synthesise");
  if (tides.size() != per_scene.size() ||
      (fit_errors.size() != per_scene.size() &&
       (mode == Synthesis::InverseErrorMean || !fit_errors.empty())))
    throw UsageError("one tide offset (and fit error) is needed per scene");
  const std::size_t n = per_scene.front().size();
  for (const auto &r : per_scene)
    if (r.size() != n)
      throw UsageError("depth rasters are not co-registered");

  std::vector<double> out(n, kNaN);
  std::vector<double> vals, wts;
  for (std::size_t p = 0; p < n; ++p) {
    vals.clear();
    wts.clear();
    for (std::size_t s = 0; s < per_scene.size(); ++s) {
      const double h = per_scene[s][p];
      if (std::isnan(h))
        continue;
      vals.push_back(h + tides[s]);
      if (mode == Synthesis::InverseErrorMean)
        wts.push_back(1.0 / std::max(fit_errors[s], 1e-12));
    }
    if (vals.empty())
      continue;
    if (mode == Synthesis::Median) {
      out[p] = median_of(vals);
    } else {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        num += wts[i] * vals[i];
        den += wts[i];
      }
      out[p] = num / den;
    }
  }
  return out;
}

} // namespace sdb::empirical
