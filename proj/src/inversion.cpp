#include "sdb/inversion.hpp"

#include "sdb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdb {

ModelFit::ModelFit(ModelDims d)
    : dims(d), P(d.n_scenes), G(d.n_scenes), X(d.n_scenes),
      delta(d.n_scenes), H(d.n_pixels), B(d.n_pixels * d.n_bottom),
      q(d.n_pixels * d.n_bottom) {}

std::vector<double> pack(const ModelFit &fit) {
  const auto &d = fit.dims;
  if (fit.P.size() != d.n_scenes || fit.G.size() != d.n_scenes ||
      fit.X.size() != d.n_scenes || fit.delta.size() != d.n_scenes ||
      fit.H.size() != d.n_pixels || fit.B.size() != d.n_pixels * d.n_bottom ||
      fit.q.size() != d.n_pixels * d.n_bottom)
    throw UsageError("model fit arrays do not match its dimensions");
  std::vector<double> v;
  v.reserve(d.total());
  for (std::size_t s = 0; s < d.n_scenes; ++s) {
    v.push_back(fit.P[s]);
    v.push_back(fit.G[s]);
    v.push_back(fit.X[s]);
    v.push_back(fit.delta[s]);
  }
  v.insert(v.end(), fit.H.begin(), fit.H.end());
  v.insert(v.end(), fit.B.begin(), fit.B.end());
  v.insert(v.end(), fit.q.begin(), fit.q.end());
  return v;
}

ModelFit unpack(std::span<const double> v, const ModelDims &dims) {
  if (v.size() != dims.total())
    throw UsageError("parameter vector has " + std::to_string(v.size()) +
                     " entries, expected " + std::to_string(dims.total()));
  ModelFit fit(dims);
  std::size_t k = 0;
  for (std::size_t s = 0; s < dims.n_scenes; ++s) {
    fit.P[s] = v[k++];
    fit.G[s] = v[k++];
    fit.X[s] = v[k++];
    fit.delta[s] = v[k++];
  }
  for (auto &h : fit.H)
    h = v[k++];
  for (auto &b : fit.B)
    b = v[k++];
  for (auto &q : fit.q)
    q = v[k++];
  return fit;
}

Bounds ParameterRanges::bounds(const ModelDims &dims) const {
  Bounds b;
  auto add = [&](double lo, double hi, std::size_t count) {
    b.lower.insert(b.lower.end(), count, lo);
    b.upper.insert(b.upper.end(), count, hi);
  };
  for (std::size_t s = 0; s < dims.n_scenes; ++s) {
    add(P_min, P_max, 1);
    add(G_min, G_max, 1);
    add(X_min, X_max, 1);
    add(delta_min, delta_max, 1);
  }
  add(H_min, H_max, dims.n_pixels);
  add(B_min, B_max, dims.n_pixels * dims.n_bottom);
  add(q_min, q_max, dims.n_pixels * dims.n_bottom);
  return b;
}

void ParameterRanges::validate() const {
  if (!(P_min > 0 && P_min < P_max && G_min > 0 && G_min < G_max &&
        X_min > 0 && X_min < X_max && delta_min < delta_max && H_min >= 0 &&
        H_min < H_max && B_min >= 0 && B_min < B_max && q_min >= 0 &&
        q_min < q_max))
    throw UsageError("parameter ranges must be ordered, with P, G, X and q "
                     "bounded away from zero");
}

void InversionOptions::validate() const {
  ranges.validate();
  weights.validate();
  simplex.validate();
  if (n_bottom == 0)
    throw UsageError("at least one bottom type is required");
  if (!(lut_match_threshold >= 0) || !(hot_start_threshold >= 0))
    throw UsageError("angle thresholds must be nonnegative");
  if (gelbstoff_slope < forward::kMinGelbstoffSlope ||
      gelbstoff_slope > forward::kMaxGelbstoffSlope)
    throw UsageError("gelbstoff slope must lie in [0.011, 0.021] nm^-1");
}

Region make_region(std::span<const Scene> scenes, std::size_t center,
                   std::size_t radius) {
  if (scenes.empty())
    throw UsageError("region needs at least one scene");
  const auto &first = scenes.front();
  for (const auto &s : scenes)
    if (s.width() != first.width() || s.height() != first.height() ||
        !(s.bands() == first.bands()))
      throw UsageError("scenes are not co-registered on one band set");
  if (center >= first.pixels())
    throw UsageError("region centre outside the raster");

  Region r;
  r.center = center;
  const auto w = static_cast<long>(first.width());
  const auto h = static_cast<long>(first.height());
  const long cx = static_cast<long>(center) % w;
  const long cy = static_cast<long>(center) / w;
  const long rad = static_cast<long>(radius);
  for (long dy = -rad; dy <= rad; ++dy)
    for (long dx = -rad; dx <= rad; ++dx) {
      const long x = std::clamp(cx + dx, 0L, w - 1);
      const long y = std::clamp(cy + dy, 0L, h - 1);
      r.pixels.push_back(static_cast<std::size_t>(y * w + x));
    }
  const std::size_t nb = first.bands().size();
  r.measured = SpectralStack(scenes.size(), r.pixels.size(), nb);
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (std::size_t i = 0; i < r.pixels.size(); ++i) {
      auto out = r.measured.spectrum(s, i);
      for (std::size_t b = 0; b < nb; ++b)
        out[b] = scenes[s].value(b, r.pixels[i]);
    }
    r.geometry.push_back(Geometry::from_above_surface(
        scenes[s].meta().sun_elevation, scenes[s].meta().view_zenith));
    r.tides.push_back(scenes[s].meta().tide_offset);
  }
  return r;
}

StackOptics::StackOptics(BandSet b, BottomLibrary lib, std::vector<double> y,
                         double s, const OpticalTables &tables)
    : bands(std::move(b)), library(std::move(lib)),
      optics(bands, library, tables), Y(std::move(y)), S(s) {}

RegionObjective::RegionObjective(const Region &region,
                                 const StackOptics &optics,
                                 const MetricWeights &weights, ModelDims dims)
    : region_(region), optics_(optics), weights_(weights), dims_(dims) {
  if (dims.n_scenes != region.measured.n_scenes ||
      dims.n_pixels != region.measured.n_pixels ||
      dims.n_bottom != optics.library.size() ||
      optics.Y.size() < dims.n_scenes)
    throw UsageError("region, optics and model dimensions disagree");
}

namespace {

struct Scratch {
  SpectralStack modelled;
  BandOptics::ColumnTerms terms;
  std::vector<double> albedo;
};

void forward_stack(const Region &region, const StackOptics &optics,
                   const ModelDims &d, std::span<const double> v,
                   Scratch &s) {
  const std::size_t nb = optics.bands.size();
  if (!s.modelled.same_shape(region.measured))
    s.modelled = SpectralStack(d.n_scenes, d.n_pixels, nb);
  s.albedo.resize(nb * d.n_pixels);
  const std::size_t h0 = 4 * d.n_scenes;
  const std::size_t b0 = h0 + d.n_pixels;
  const std::size_t q0 = b0 + d.n_pixels * d.n_bottom;
  for (std::size_t i = 0; i < d.n_pixels; ++i)
    optics.optics.mix(v.subspan(b0 + i * d.n_bottom, d.n_bottom),
                      v.subspan(q0 + i * d.n_bottom, d.n_bottom),
                      std::span<double>(s.albedo).subspan(i * nb, nb));
  for (std::size_t j = 0; j < d.n_scenes; ++j) {
    WaterColumn w{v[4 * j], v[4 * j + 1], v[4 * j + 2], v[4 * j + 3],
                  optics.S, optics.Y[j]};
    optics.optics.column_terms(w, s.terms);
    for (std::size_t i = 0; i < d.n_pixels; ++i) {
      const double H = std::max(v[h0 + i] - region.tides[j], 0.0);
      optics.optics.surface_rrs(
          w, s.terms, std::span<const double>(s.albedo).subspan(i * nb, nb), H,
          region.geometry[j], s.modelled.spectrum(j, i));
    }
  }
}

} // namespace

double RegionObjective::operator()(std::span<const double> v) const {
  thread_local Scratch s;
  forward_stack(region_, optics_, dims_, v, s);
  const auto &meas = region_.measured;
  double sq = 0.0, sum = 0.0, sam = 0.0;
  for (std::size_t k = 0; k < meas.values.size(); ++k) {
    const double d = s.modelled.values[k] - meas.values[k];
    sq += d * d;
    sum += meas.values[k];
  }
  for (std::size_t j = 0; j < meas.n_scenes; ++j)
    for (std::size_t i = 0; i < meas.n_pixels; ++i)
      sam += spectral_angle_or_max(s.modelled.spectrum(j, i),
                                   meas.spectrum(j, i));
  sam /= static_cast<double>(meas.n_scenes * meas.n_pixels);
  if (!(sum > 0.0))
    return std::numeric_limits<double>::infinity();
  const auto H = v.subspan(4 * dims_.n_scenes, dims_.n_pixels);
  return weights_.omega0 * (std::sqrt(sq) / sum) * sam +
         weights_.omega1 * metrics::e_depth_continuity(H, weights_.kappa);
}

SpectralStack RegionObjective::model(std::span<const double> v) const {
  Scratch s;
  forward_stack(region_, optics_, dims_, v, s);
  return s.modelled;
}

StartPoint cold_start(const Region &region, const StackOptics &optics,
                      const InversionOptions &opt,
                      std::span<const double> depth_prior) {
  const auto &bands = optics.bands;
  const auto &meas = region.measured;
  const ModelDims dims{meas.n_scenes, meas.n_pixels, optics.library.size()};
  const auto &rg = opt.ranges;
  StartPoint sp{ModelFit(dims), false};
  auto &fit = sp.fit;

  const std::size_t i440 = bands.nearest(440.0), i490 = bands.nearest(490.0),
                    i550 = bands.nearest(550.0), i640 = bands.nearest(640.0),
                    i750 = bands.nearest(750.0);
  const double aw640 = OpticalTables::builtin().water_absorption.value_at(640.0);

  for (std::size_t j = 0; j < dims.n_scenes; ++j) {
    std::vector<double> mean(bands.size(), 0.0);
    for (std::size_t i = 0; i < dims.n_pixels; ++i) {
      auto sp_ = meas.spectrum(j, i);
      for (std::size_t b = 0; b < bands.size(); ++b)
        mean[b] += sp_[b] / static_cast<double>(dims.n_pixels);
    }
    const double ratio = mean[i440] / mean[i550];
    double P = 0.05;
    if (ratio > 0.0 && std::isfinite(ratio))
      P = 0.072 * std::pow(ratio, -1.7);
    else
      warn("cold start: nonpositive 440/550 band ratio, using P = 0.05");
    fit.P[j] = std::clamp(P, rg.P_min, rg.P_max);
    fit.G[j] = std::clamp(1.5 * P, rg.G_min, rg.G_max);
    fit.X[j] = std::clamp(30.0 * aw640 * mean[i640], rg.X_min, rg.X_max);
    fit.delta[j] = std::clamp(mean[i750], rg.delta_min, rg.delta_max);
  }

  for (std::size_t i = 0; i < dims.n_pixels; ++i) {
    double r490 = 0.0;
    for (std::size_t j = 0; j < dims.n_scenes; ++j)
      r490 += meas.spectrum(j, i)[i490] / static_cast<double>(dims.n_scenes);
    for (std::size_t t = 0; t < dims.n_bottom; ++t) {
      fit.b(i, t) = std::clamp(0.4 * r490, rg.B_min, rg.B_max);
      fit.w(i, t) = std::clamp(1.0, rg.q_min, rg.q_max);
    }
  }

  std::fill(fit.H.begin(), fit.H.end(), std::clamp(kDepthLadder[0], rg.H_min, rg.H_max));
  if (!depth_prior.empty()) {
    if (depth_prior.size() != dims.n_pixels)
      throw UsageError("depth prior does not match the region size");
    double sum = 0.0;
    std::size_t n = 0;
    for (double h : depth_prior)
      if (std::isfinite(h)) {
        sum += h;
        ++n;
      }
    if (n > 0) {
      const double fill = sum / static_cast<double>(n);
      for (std::size_t i = 0; i < dims.n_pixels; ++i)
        fit.H[i] = std::clamp(std::isfinite(depth_prior[i]) ? depth_prior[i] : fill,
                              rg.H_min, rg.H_max);
      sp.has_depth = true;
    }
  }
  return sp;
}

bool should_hot_start(const Region &current, const Region &previous,
                      double threshold) {
  if (current.measured.n_scenes != previous.measured.n_scenes)
    return false;
  double total = 0.0;
  for (std::size_t j = 0; j < current.measured.n_scenes; ++j)
    total += spectral_angle_or_max(current.center_spectrum(j),
                                   previous.center_spectrum(j));
  return total / static_cast<double>(current.measured.n_scenes) < threshold;
}

ModelFit invert_region(const Region &region, const StartPoint &start,
                       const StackOptics &optics,
                       const InversionOptions &opt) {
  const ModelDims dims = start.fit.dims;
  RegionObjective objective(region, optics, opt.weights, dims);
  const Bounds bounds = opt.ranges.bounds(dims);
  const Objective f = [&](std::span<const double> v) { return objective(v); };

  auto x0 = pack(start.fit);
  bounds.clamp(x0);
  MinimizeResult best;
  if (start.has_depth) {
    best = minimize(f, x0, bounds, opt.simplex);
  } else {
    std::vector<std::vector<double>> starts;
    for (double d : kDepthLadder) {
      auto x = x0;
      for (std::size_t i = 0; i < dims.n_pixels; ++i)
        x[4 * dims.n_scenes + i] = std::clamp(d, opt.ranges.H_min, opt.ranges.H_max);
      starts.push_back(std::move(x));
    }
    if (opt.ladder_screen_iterations == 0) {
      best = multi_start_minimize(f, starts, bounds, opt.simplex, opt.jobs);
    } else {
      SimplexConfig screen = opt.simplex;
      screen.max_iterations =
          std::min(opt.ladder_screen_iterations, opt.simplex.max_iterations);
      const auto scout = multi_start_minimize(f, starts, bounds, screen, opt.jobs);
      best = minimize(f, scout.x, bounds, opt.simplex);
      best.iterations += scout.iterations;
      best.evaluations += scout.evaluations;
    }
  }
  ModelFit fit = unpack(best.x, dims);
  fit.e_photic = metrics::to_percent(best.f);
  fit.iterations = best.iterations;
  fit.source = FitSource::Optimizer;
  return fit;
}

std::vector<std::size_t> order_pixels(std::span<const Scene> scenes,
                                      const DeepWaterStats &stats) {
  if (scenes.empty())
    throw UsageError("no scenes to order");
  const Scene &ref = scenes.front();
  const std::size_t nb = ref.bands().size();
  std::vector<double> angle(ref.pixels());
  std::vector<double> r(nb);
  for (std::size_t p = 0; p < ref.pixels(); ++p) {
    if (ref.is_nodata(p)) {
      angle[p] = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t b = 0; b < nb; ++b)
      r[b] = forward::surface_to_subsurface(ref.value(b, p), 0.0);
    angle[p] = spectral_angle_or_max(r, stats.mean.values);
  }
  std::vector<std::size_t> order(ref.pixels());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
  return order;
}

std::vector<double> estimate_particle_exponents(
    std::span<const DeepWaterStats> stats, const BandSet &bands) {
  std::vector<double> Y;
  for (const auto &s : stats) {
    try {
      Y.push_back(forward::estimate_Y(s.surface_mean, bands));
    } catch (const DegenerateError &e) {
      warn(std::string(e.what()) + "; using Y = 1");
      Y.push_back(1.0);
    }
  }
  return Y;
}

DeepWaterStats darkest_pixel_stats(const Scene &scene) {
  std::vector<std::pair<double, std::size_t>> brightness;
  for (std::size_t p = 0; p < scene.pixels(); ++p) {
    if (scene.is_nodata(p))
      continue;
    double s = 0.0;
    for (std::size_t b = 0; b < scene.bands().size(); ++b)
      s += scene.value(b, p);
    brightness.emplace_back(s, p);
  }
  if (brightness.empty())
    throw UsageError("scene has no valid pixels");
  std::stable_sort(brightness.begin(), brightness.end(),
                   [](const auto &a, const auto &b) { return a.first < b.first; });
  const std::size_t n = std::max<std::size_t>(1, brightness.size() / 100);
  std::vector<std::size_t> px;
  for (std::size_t i = 0; i < n; ++i)
    px.push_back(brightness[i].second);
  auto previous = set_warning_sink({});
  auto stats = empirical::deep_water_stats(scene, px);
  set_warning_sink(std::move(previous));
  return stats;
}

} // namespace sdb
