#include "sdb/scene_stack.hpp"

#include "sdb/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace sdb {

FitRaster::FitRaster(std::size_t w, std::size_t h, std::size_t scenes,
                     std::size_t bottom)
    : width(w), height(h), n_scenes(scenes), n_bottom(bottom), pixels(w * h),
      quality(w * h, Quality::NoData) {}

std::vector<double> FitRaster::depth() const {
  std::vector<double> out(size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t p = 0; p < size(); ++p)
    if (quality[p] == Quality::Ok)
      out[p] = pixels[p].H;
  return out;
}

Raster FitRaster::to_raster(float nodata) const {
  std::vector<std::string> names{"H", "e_photic", "iterations", "source",
                                 "quality"};
  for (std::size_t j = 0; j < n_scenes; ++j)
    for (const char *p : {"P", "G", "X", "delta"})
      names.push_back(std::string(p) + "_" + std::to_string(j));
  for (std::size_t t = 0; t < n_bottom; ++t)
    names.push_back("B_" + std::to_string(t));
  for (std::size_t t = 0; t < n_bottom; ++t)
    names.push_back("q_" + std::to_string(t));

  Raster r(width, height, names, nodata);
  r.meta = meta;
  r.meta.nodata = nodata;
  for (std::size_t p = 0; p < size(); ++p) {
    r.at(4, p) = static_cast<float>(quality[p]);
    if (quality[p] != Quality::Ok)
      continue;
    const auto &x = pixels[p];
    std::size_t layer = 0;
    r.at(layer++, p) = static_cast<float>(x.H);
    r.at(layer++, p) = static_cast<float>(x.e_photic);
    r.at(layer++, p) = static_cast<float>(x.iterations);
    r.at(layer++, p) = x.source == FitSource::Lut ? 1.0f : 0.0f;
    ++layer;
    for (std::size_t j = 0; j < n_scenes; ++j) {
      r.at(layer++, p) = static_cast<float>(x.P[j]);
      r.at(layer++, p) = static_cast<float>(x.G[j]);
      r.at(layer++, p) = static_cast<float>(x.X[j]);
      r.at(layer++, p) = static_cast<float>(x.delta[j]);
    }
    for (std::size_t t = 0; t < n_bottom; ++t)
      r.at(layer++, p) = static_cast<float>(x.B[t]);
    for (std::size_t t = 0; t < n_bottom; ++t)
      r.at(layer++, p) = static_cast<float>(x.q[t]);
  }
  return r;
}

FitRaster FitRaster::from_raster(const Raster &r) {
  std::size_t scenes = 0, bottom = 0;
  for (const auto &n : r.layer_names) {
    if (n.rfind("P_", 0) == 0)
      ++scenes;
    if (n.rfind("B_", 0) == 0)
      ++bottom;
  }
  if (r.layers() != 5 + 4 * scenes + 2 * bottom || r.layer_names.empty() ||
      r.layer_names[0] != "H")
    throw DataError("raster is not a fit raster");
  FitRaster f(r.width, r.height, scenes, bottom);
  f.meta = r.meta;
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto q = static_cast<int>(r.at(4, p));
    f.quality[p] = q == 0 ? Quality::Ok : q == 1 ? Quality::Failed : Quality::NoData;
    if (f.quality[p] != Quality::Ok)
      continue;
    auto &x = f.pixels[p];
    x.H = r.at(0, p);
    x.e_photic = r.at(1, p);
    x.iterations = static_cast<std::size_t>(r.at(2, p));
    x.source = r.at(3, p) != 0.0f ? FitSource::Lut : FitSource::Optimizer;
    std::size_t layer = 5;
    for (std::size_t j = 0; j < scenes; ++j) {
      x.P.push_back(r.at(layer++, p));
      x.G.push_back(r.at(layer++, p));
      x.X.push_back(r.at(layer++, p));
      x.delta.push_back(r.at(layer++, p));
    }
    for (std::size_t t = 0; t < bottom; ++t)
      x.B.push_back(r.at(layer++, p));
    for (std::size_t t = 0; t < bottom; ++t)
      x.q.push_back(r.at(layer++, p));
  }
  return f;
}

double RunReport::hit_rate() const {
  const std::size_t modelled = lut_hits + optimizer_runs;
  return modelled ? static_cast<double>(lut_hits) / static_cast<double>(modelled)
                  : 0.0;
}

double RunReport::lut_throughput() const {
  return lut_seconds > 0 ? static_cast<double>(lut_hits) / lut_seconds : 0.0;
}

double RunReport::optimizer_throughput() const {
  return optimizer_seconds > 0
             ? static_cast<double>(optimizer_runs) / optimizer_seconds
             : 0.0;
}

std::string RunReport::to_json() const {
  nlohmann::json j{{"pixels", pixels},
                   {"nodata", nodata},
                   {"failed", failed},
                   {"lut_hits", lut_hits},
                   {"optimizer_runs", optimizer_runs},
                   {"hot_starts", hot_starts},
                   {"cold_starts", cold_starts},
                   {"ladder_runs", ladder_runs},
                   {"lut_inserts", lut_inserts},
                   {"total_iterations", total_iterations},
                   {"lut_hit_rate", hit_rate()},
                   {"lut_seconds", lut_seconds},
                   {"optimizer_seconds", optimizer_seconds},
                   {"lut_pixels_per_second", lut_throughput()},
                   {"optimizer_pixels_per_second", optimizer_throughput()},
                   {"final_insertion_threshold", final_insertion_threshold},
                   {"particle_exponent", Y}};
  return j.dump(2);
}

std::optional<Region> valid_region(std::span<const Scene> scenes,
                                   std::size_t center, std::size_t radius) {
  for (const auto &s : scenes)
    if (s.is_nodata(center))
      return std::nullopt;
  Region r = make_region(scenes, center, radius);
  for (std::size_t i = 0; i < r.pixels.size(); ++i) {
    bool bad = false;
    for (const auto &s : scenes)
      bad = bad || s.is_nodata(r.pixels[i]);
    if (!bad)
      continue;
    r.pixels[i] = center;
    for (std::size_t j = 0; j < scenes.size(); ++j) {
      auto dst = r.measured.spectrum(j, i);
      auto src = r.measured.spectrum(j, r.center_slot());
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return r;
}

std::vector<double> particle_exponents(std::span<const DeepWaterStats> stats,
                                       const BandSet &bands,
                                       const InversionOptions &opt) {
  if (opt.particle_exponent)
    return std::vector<double>(stats.size(), *opt.particle_exponent);
  return estimate_particle_exponents(stats, bands);
}

std::vector<DeepWaterStats> resolve_deep_stats(std::span<const Scene> scenes,
                                               std::span<const DeepWaterStats> given) {
  if (!given.empty()) {
    if (given.size() != scenes.size())
      throw UsageError("one set of deep-water statistics is needed per scene");
    return {given.begin(), given.end()};
  }
  std::vector<DeepWaterStats> out;
  for (const auto &s : scenes)
    out.push_back(darkest_pixel_stats(s));
  return out;
}

StackResult run_scene_stack(std::span<const Scene> scenes,
                            const StackInputs &in,
                            const InversionOptions &opt) {
  using Clock = std::chrono::steady_clock;
  opt.validate();
  if (scenes.empty())
    throw UsageError("no scenes to invert");
  if (in.library.size() == 0)
    throw UsageError("bottom library is empty");
  const Scene &ref = scenes.front();
  if (!in.depth_prior.empty() && in.depth_prior.size() != ref.pixels())
    throw UsageError("depth prior does not match the scene size");

  const auto stats = resolve_deep_stats(scenes, in.deep_stats);
  StackOptics optics(ref.bands(), in.library,
                     particle_exponents(stats, ref.bands(), opt),
                     opt.gelbstoff_slope);

  StackResult out;
  out.fits = FitRaster(ref.width(), ref.height(), scenes.size(), in.library.size());
  out.fits.meta = ref.meta();
  auto &rep = out.report;
  rep.pixels = ref.pixels();
  rep.Y = optics.Y;

  DynamicLut lut(scenes.size(), ref.bands().size(), opt.lut_match_threshold);
  std::optional<Region> previous;
  std::optional<ModelFit> previous_fit;

  for (std::size_t p : order_pixels(scenes, stats.front())) {
    auto region = valid_region(scenes, p, opt.region_radius);
    if (!region) {
      out.fits.quality[p] = Quality::NoData;
      ++rep.nodata;
      continue;
    }
    const auto t0 = Clock::now();
    if (opt.use_lut) {
      if (auto hit = lut.query(*region)) {
        out.fits.pixels[p] = hit->result;
        out.fits.quality[p] = Quality::Ok;
        ++rep.lut_hits;
        rep.lut_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        continue;
      }
    }

    std::vector<double> prior;
    if (!in.depth_prior.empty())
      for (auto idx : region->pixels)
        prior.push_back(in.depth_prior[idx]);

    try {
      StartPoint start = cold_start(*region, optics, opt, prior);
      if (previous && previous_fit &&
          should_hot_start(*region, *previous, opt.hot_start_threshold)) {
        start.fit.P = previous_fit->P;
        start.fit.G = previous_fit->G;
        start.fit.X = previous_fit->X;
        start.fit.delta = previous_fit->delta;
        if (!start.has_depth) {
          const double h = previous_fit->H[previous->center_slot()];
          std::fill(start.fit.H.begin(), start.fit.H.end(), h);
          start.has_depth = true;
        }
        ++rep.hot_starts;
      } else {
        ++rep.cold_starts;
      }
      if (!start.has_depth)
        ++rep.ladder_runs;

      InversionOptions local = opt;
      local.simplex.rng_seed = opt.simplex.rng_seed + 7919 * p;
      ModelFit fit = invert_region(*region, start, optics, local);
      PixelResult res = center_result(fit, region->center_slot());
      out.fits.pixels[p] = res;
      out.fits.quality[p] = Quality::Ok;
      rep.total_iterations += fit.iterations;
      if (opt.use_lut && lut.insert(*region, res))
        ++rep.lut_inserts;
      previous = std::move(region);
      previous_fit = std::move(fit);
    } catch (const Error &e) {
      out.fits.quality[p] = Quality::Failed;
      ++rep.failed;
      warn("pixel " + std::to_string(p) + " not fitted: " + e.what());
    }
    ++rep.optimizer_runs;
    rep.optimizer_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  rep.final_insertion_threshold = lut.insertion_threshold();
  return out;
}

} // namespace sdb
