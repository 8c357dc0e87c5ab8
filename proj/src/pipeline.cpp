#include "sdb/pipeline.hpp"

#include "sdb/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

namespace sdb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs task(i) for i in [0, n) on up to `jobs` threads, in batches.
template <typename Task>
void run_batched(std::size_t n, std::size_t jobs, Task task) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      task(i);
    return;
  }
  for (std::size_t first = 0; first < n; first += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = first; i < std::min(first + jobs, n); ++i)
      batch.push_back(std::async(std::launch::async, task, i));
    for (auto &f : batch)
      f.get();
  }
}

} // namespace

std::vector<Combination> scene_combinations(std::size_t n, std::size_t max_size) {
  if (n == 0)
    throw UsageError("scene combinations need at least one scene");
  std::vector<Combination> out;
  for (std::size_t k = 1; k <= std::min(n, max_size); ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
    do {
      Combination c;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i])
          c.push_back(i);
      out.push_back(std::move(c));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

double weighted_median(std::span<const double> values,
                       std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw UsageError("weighted median needs one weight per value");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0))
      throw UsageError("weighted median weights must be positive");
    total += w;
  }
  double cum = 0.0;
  for (auto i : idx) {
    cum += weights[i];
    if (cum >= 0.5 * total)
      return values[i];
  }
  return values[idx.back()];
}

std::vector<double> weighted_median_depth(const IterationSet &set,
                                          bool weighted) {
  if (set.results.empty() || set.results.size() != set.combinations.size())
    throw UsageError("iteration set needs one result per combination");
  const std::size_t n = set.results.front().size();
  for (const auto &r : set.results)
    if (r.size() != n)
      throw UsageError("iteration results are not co-registered");
  std::vector<double> out(n, kNaN), vals, wts;
  for (std::size_t p = 0; p < n; ++p) {
    vals.clear();
    wts.clear();
    for (std::size_t i = 0; i < set.results.size(); ++i) {
      if (set.results[i].quality[p] != Quality::Ok)
        continue;
      vals.push_back(set.results[i].pixels[p].H);
      wts.push_back(weighted ? static_cast<double>(set.combinations[i].size())
                             : 1.0);
    }
    if (!vals.empty())
      out[p] = weighted_median(vals, wts);
  }
  return out;
}

double aligned_depth(const AlignmentCoefficients &k, std::span<const double> H) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    num += k.c[i] * k.a[i] * std::pow(H[i], k.b[i]);
    den += k.c[i];
  }
  return num / den;
}

std::optional<Alignment> align_depths(
    std::span<const std::vector<double>> rasters, std::size_t width,
    std::size_t height, const GeoTransform &gt, const SoundingSet &soundings,
    const SimplexConfig &cfg) {
  const std::size_t n = rasters.size();
  if (n == 0)
    throw UsageError("alignment needs at least one depth raster");
  for (const auto &r : rasters)
    if (r.size() != width * height)
      throw UsageError("alignment rasters do not match the grid");

  auto usable = [&](std::size_t p) {
    return std::all_of(rasters.begin(), rasters.end(), [&](const auto &r) {
      return std::isfinite(r[p]) && r[p] > 0.0;
    });
  };
  std::vector<std::vector<double>> H;
  std::vector<double> depths;
  for (const auto &s : soundings.points) {
    const auto p = pixel_of(gt, width, height, s.x, s.y);
    if (!p || !usable(*p))
      continue;
    std::vector<double> h;
    for (const auto &r : rasters)
      h.push_back(r[*p]);
    H.push_back(std::move(h));
    depths.push_back(s.depth);
  }
  if (depths.size() < 3 * n) {
    warn("alignment skipped: " + std::to_string(depths.size()) +
         " usable soundings, " + std::to_string(3 * n) + " needed");
    return std::nullopt;
  }
  const auto weights = empirical::fit_weights(depths);

  Bounds b;
  for (int block = 0; block < 3; ++block)
    for (std::size_t i = 0; i < n; ++i) {
      b.lower.push_back(block == 2 ? 0.5 : 1e-3);
      b.upper.push_back(block == 2 ? 2.0 : 10.0);
    }
  auto unpack_k = [n](std::span<const double> v) {
    AlignmentCoefficients k;
    k.c.assign(v.begin(), v.begin() + static_cast<long>(n));
    k.a.assign(v.begin() + static_cast<long>(n), v.begin() + static_cast<long>(2 * n));
    k.b.assign(v.begin() + static_cast<long>(2 * n), v.end());
    return k;
  };
  std::vector<double> pred(depths.size());
  auto objective = [&](std::span<const double> v) {
    const auto k = unpack_k(v);
    for (std::size_t i = 0; i < depths.size(); ++i)
      pred[i] = aligned_depth(k, H[i]);
    return empirical::weighted_relative_rms(pred, depths, weights);
  };
  const std::vector<double> ones(3 * n, 1.0);
  const auto best = minimize(objective, ones, b, cfg);

  Alignment out;
  out.coefficients = unpack_k(best.x);
  out.coefficients.fit_error = best.f;
  out.coefficients.soundings_used = depths.size();
  out.depth.assign(width * height, kNaN);
  std::vector<double> h(n);
  for (std::size_t p = 0; p < width * height; ++p) {
    if (!usable(p))
      continue;
    for (std::size_t i = 0; i < n; ++i)
      h[i] = rasters[i][p];
    out.depth[p] = aligned_depth(out.coefficients, h);
  }
  return out;
}

KAverage average_k(const IterationSet &set, const BandSet &bands,
                   std::span<const double> Y, double S,
                   const OpticalTables &tables) {
  if (set.results.empty())
    throw UsageError("k averaging needs at least one iteration");
  const std::size_t n = set.results.front().size();
  const std::size_t nb = bands.size();
  KAverage out;
  out.per_band.assign(nb, std::vector<double>(n, kNaN));
  out.minimum.assign(n, kNaN);
  std::vector<double> sum(nb);
  for (std::size_t p = 0; p < n; ++p) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < set.results.size(); ++i) {
      const auto &r = set.results[i];
      if (r.quality[p] != Quality::Ok)
        continue;
      const auto &x = r.pixels[p];
      for (std::size_t m = 0; m < set.combinations[i].size(); ++m) {
        const std::size_t scene = set.combinations[i][m];
        if (scene >= Y.size())
          throw UsageError("no particle exponent for scene " + std::to_string(scene));
        const WaterColumn w{x.P[m], x.G[m], x.X[m], x.delta[m], S, Y[scene]};
        for (std::size_t b = 0; b < nb; ++b)
          sum[b] += forward::total_iops(w, bands.center(b), tables).k;
        ++count;
      }
    }
    if (count == 0)
      continue;
    double lo = kInf;
    for (std::size_t b = 0; b < nb; ++b) {
      out.per_band[b][p] = sum[b] / static_cast<double>(count);
      lo = std::min(lo, out.per_band[b][p]);
    }
    out.minimum[p] = lo;
  }
  return out;
}

std::vector<double> median_filter3(std::span<const double> v, std::size_t w,
                                   std::size_t h) {
  if (v.size() != w * h)
    throw UsageError("median filter input does not match the grid");
  std::vector<double> out(v.size(), kNaN), win;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      win.clear();
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const auto xx = static_cast<std::size_t>(
              std::clamp(static_cast<long>(x) + dx, 0L, static_cast<long>(w) - 1));
          const auto yy = static_cast<std::size_t>(
              std::clamp(static_cast<long>(y) + dy, 0L, static_cast<long>(h) - 1));
          const double val = v[yy * w + xx];
          if (std::isfinite(val))
            win.push_back(val);
        }
      if (win.empty())
        continue;
      std::sort(win.begin(), win.end());
      const std::size_t m = win.size();
      out[y * w + x] = m % 2 ? win[m / 2] : 0.5 * (win[m / 2 - 1] + win[m / 2]);
    }
  return out;
}

BottomFit fit_bottom(std::span<const double> unmixed, std::size_t n_bands,
                     const BandOptics &optics, const UnmixOptions &opt) {
  const std::size_t nt = optics.bottom_count();
  if (n_bands == 0 || n_bands != optics.band_count() || unmixed.empty() ||
      unmixed.size() % n_bands != 0)
    throw UsageError("unmixed albedo does not match the band set");
  if (nt == 0)
    throw UsageError("bottom library is empty");
  const std::size_t ns = unmixed.size() / n_bands;
  const auto &rg = opt.ranges;

  Bounds b;
  b.lower.assign(nt, rg.B_min);
  b.upper.assign(nt, rg.B_max);
  b.lower.insert(b.lower.end(), nt, rg.q_min);
  b.upper.insert(b.upper.end(), nt, rg.q_max);

  std::vector<double> model(unmixed.size());
  auto forward_mix = [&](std::span<const double> v) {
    optics.mix(v.first(nt), v.subspan(nt, nt),
               std::span<double>(model).first(n_bands));
    for (std::size_t j = 1; j < ns; ++j)
      std::copy(model.begin(), model.begin() + static_cast<long>(n_bands),
                model.begin() + static_cast<long>(j * n_bands));
  };
  auto e_total = [&](std::span<const double> v) {
    forward_mix(v);
    return metrics::e_unmixed(model, unmixed, n_bands);
  };

  double mean = 0.0;
  for (double r : unmixed)
    mean += r / static_cast<double>(unmixed.size());
  const double B0 = std::clamp(mean, rg.B_min, rg.B_max);
  std::vector<std::vector<double>> starts;
  std::vector<double> equal(2 * nt, B0);
  std::fill(equal.begin() + static_cast<long>(nt), equal.end(),
            std::clamp(1.0, rg.q_min, rg.q_max));
  starts.push_back(equal);
  for (std::size_t t = 0; t < nt && nt > 1; ++t) {
    auto s = equal;
    for (std::size_t u = 0; u < nt; ++u)
      s[nt + u] = u == t ? std::clamp(1.0, rg.q_min, rg.q_max) : rg.q_min;
    starts.push_back(std::move(s));
  }
  const auto stage1 = multi_start_minimize(e_total, starts, b, opt.simplex);

  const double limit =
      stage1.f + std::max(1e-12, opt.stage_two_slack * stage1.f);
  auto e_amplitude = [&](std::span<const double> v) {
    forward_mix(v);
    if (metrics::e_unmixed(model, unmixed, n_bands) > limit)
      return kInf;
    return metrics::e_unmixed_rms(model, unmixed, n_bands);
  };
  const auto stage2 = minimize(e_amplitude, stage1.x, b, opt.simplex);

  BottomFit fit;
  fit.B.assign(stage2.x.begin(), stage2.x.begin() + static_cast<long>(nt));
  fit.q.assign(stage2.x.begin() + static_cast<long>(nt), stage2.x.end());
  forward_mix(stage2.x);
  fit.e_unmixed = metrics::e_unmixed(model, unmixed, n_bands);
  fit.e_rms = metrics::e_unmixed_rms(model, unmixed, n_bands);
  double bq = 0.0, qs = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    bq += fit.B[t] * fit.q[t];
    qs += fit.q[t];
  }
  fit.albedo = bq / qs;
  fit.fractions.assign(nt, bq > 0.0 ? 0.0 : 1.0 / static_cast<double>(nt));
  if (bq > 0.0)
    for (std::size_t t = 0; t < nt; ++t)
      fit.fractions[t] = fit.B[t] * fit.q[t] / bq;
  return fit;
}

FixedColumn fixed_water_column(const IterationSet &set, std::size_t n_scenes,
                               std::size_t width, std::size_t height) {
  const std::size_t n = width * height;
  FixedColumn col;
  for (auto *v : {&col.P, &col.G, &col.X, &col.delta})
    v->assign(n_scenes, std::vector<double>(n, kNaN));
  for (std::size_t j = 0; j < n_scenes; ++j) {
    for (std::size_t p = 0; p < n; ++p) {
      double sp = 0, sg = 0, sx = 0, sd = 0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < set.results.size(); ++i) {
        const auto &c = set.combinations[i];
        const auto it = std::find(c.begin(), c.end(), j);
        if (it == c.end() || set.results[i].quality[p] != Quality::Ok)
          continue;
        const auto m = static_cast<std::size_t>(it - c.begin());
        const auto &x = set.results[i].pixels[p];
        sp += x.P[m];
        sg += x.G[m];
        sx += x.X[m];
        sd += x.delta[m];
        ++count;
      }
      if (count == 0)
        continue;
      const double k = static_cast<double>(count);
      col.P[j][p] = sp / k;
      col.G[j][p] = sg / k;
      col.X[j][p] = sx / k;
      col.delta[j][p] = sd / k;
    }
    col.P[j] = median_filter3(col.P[j], width, height);
    col.G[j] = median_filter3(col.G[j], width, height);
    col.X[j] = median_filter3(col.X[j], width, height);
    col.delta[j] = median_filter3(col.delta[j], width, height);
  }
  return col;
}

std::optional<std::vector<double>> unmixed_albedo(
    std::span<const Scene> scenes, const FixedColumn &col,
    std::span<const double> Y, double S, double H, std::size_t p) {
  if (!std::isfinite(H))
    return std::nullopt;
  const auto &bands = scenes.front().bands();
  std::vector<double> out;
  for (std::size_t j = 0; j < scenes.size(); ++j) {
    const WaterColumn w{col.P[j][p], col.G[j][p], col.X[j][p], col.delta[j][p],
                        S, Y[j]};
    if (!std::isfinite(w.P) || scenes[j].is_nodata(p))
      return std::nullopt;
    const auto g = Geometry::from_above_surface(scenes[j].meta().sun_elevation,
                                                scenes[j].meta().view_zenith);
    const double Hi = std::max(H - scenes[j].meta().tide_offset, 0.0);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      double rho = kNaN;
      try {
        rho = forward::rho_modelled(w, Hi, g, scenes[j].value(b, p),
                                    bands.center(b));
      } catch (const Error &) {
        return std::nullopt;
      }
      if (!std::isfinite(rho))
        return std::nullopt;
      out.push_back(rho);
    }
  }
  return out;
}

UnmixResult unmix_bottom(std::span<const Scene> scenes, const FixedColumn &col,
                         std::span<const double> H, std::span<const double> Y,
                         double S, const BottomLibrary &library,
                         const UnmixOptions &opt) {
  if (scenes.empty())
    throw UsageError("unmixing needs at least one scene");
  const auto &ref = scenes.front();
  if (H.size() != ref.pixels() || Y.size() != scenes.size() ||
      col.P.size() != scenes.size())
    throw UsageError("unmixing inputs do not match the scene stack");
  const BandOptics optics(ref.bands(), library);
  UnmixResult out;
  out.width = ref.width();
  out.height = ref.height();
  out.n_bottom = library.size();
  out.pixels.resize(ref.pixels());
  out.quality.assign(ref.pixels(), Quality::NoData);
  for (std::size_t p = 0; p < ref.pixels(); ++p) {
    const auto rho = unmixed_albedo(scenes, col, Y, S, H[p], p);
    if (!rho) {
      out.quality[p] = std::isfinite(H[p]) ? Quality::Failed : Quality::NoData;
      continue;
    }
    try {
      out.pixels[p] = fit_bottom(*rho, ref.bands().size(), optics, opt);
      out.quality[p] = Quality::Ok;
    } catch (const Error &e) {
      out.quality[p] = Quality::Failed;
      warn("pixel " + std::to_string(p) + " not unmixed: " + e.what());
    }
  }
  return out;
}

BottomSearch exhaustive_bottom_search(std::span<const double> unmixed,
                                      std::size_t n_bands, const BandSet &bands,
                                      const BottomLibrary &library,
                                      const UnmixOptions &opt) {
  const std::size_t k = library.size();
  if (k == 0)
    throw UsageError("bottom library is empty");
  std::vector<std::vector<std::size_t>> candidates;
  for (std::size_t i = 0; i < k; ++i)
    candidates.push_back({i});
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      candidates.push_back({i, j});

  BottomSearch best;
  double best_error = kInf;
  for (const auto &members : candidates) {
    const BandOptics optics(bands, library.subset(members));
    auto fit = fit_bottom(unmixed, n_bands, optics, opt);
    ++best.candidates;
    best.candidate_errors.push_back(fit.e_unmixed);
    const double margin = members.size() > 1 ? 1e-6 * best_error + 1e-15 : 0.0;
    if (fit.e_unmixed < best_error - margin) {
      best_error = fit.e_unmixed;
      best.members = members;
      best.fit = std::move(fit);
    }
  }
  return best;
}

std::vector<double> depth_error_estimate(std::span<const Scene> scenes,
                                         const StackInputs &in,
                                         const InversionOptions &opt,
                                         const FitRaster &baseline,
                                         const DepthErrorConfig &cfg) {
  if (cfg.n_trials < 2)
    throw UsageError("depth error estimation needs at least two trials");
  if (scenes.empty() || baseline.size() != scenes.front().pixels())
    throw UsageError("baseline fit does not match the scenes");
  if (!(cfg.noise_scale >= 0.0) || !(cfg.alpha >= 0.0))
    throw UsageError("noise scale and alpha must be nonnegative");
  const Scene &ref = scenes.front();
  const auto stats = resolve_deep_stats(scenes, in.deep_stats);
  const StackOptics optics(ref.bands(), in.library,
                           particle_exponents(stats, ref.bands(), opt),
                           opt.gelbstoff_slope);
  const ModelDims dims{scenes.size(),
                       (2 * opt.region_radius + 1) * (2 * opt.region_radius + 1),
                       in.library.size()};
  const std::size_t n = ref.pixels();
  std::vector<std::vector<double>> trials(cfg.n_trials,
                                          std::vector<double>(n, kNaN));

  auto run_trial = [&](std::size_t t) {
    std::vector<Scene> noisy(scenes.begin(), scenes.end());
    std::mt19937_64 rng(cfg.rng_seed + t);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t j = 0; j < noisy.size(); ++j)
      for (std::size_t b = 0; b < ref.bands().size(); ++b) {
        const double sigma = stats[j].surface_stddev[b] * cfg.noise_scale;
        for (std::size_t p = 0; p < n; ++p) {
          const double u = unit(rng);
          if (sigma > 0.0 && !scenes[j].is_nodata(p))
            noisy[j].set(b, p, static_cast<float>(noisy[j].value(b, p) + sigma * u));
        }
      }
    for (std::size_t p = 0; p < n; ++p) {
      if (baseline.quality[p] != Quality::Ok)
        continue;
      try {
        auto region = valid_region(noisy, p, opt.region_radius);
        if (!region)
          continue;
        const auto &c = baseline.pixels[p];
        StartPoint start{ModelFit(dims), true};
        auto &f = start.fit;
        f.P = c.P;
        f.G = c.G;
        f.X = c.X;
        f.delta = c.delta;
        for (std::size_t i = 0; i < dims.n_pixels; ++i) {
          const std::size_t q = region->pixels[i];
          const auto &src =
              baseline.quality[q] == Quality::Ok ? baseline.pixels[q] : c;
          f.H[i] = src.H;
          for (std::size_t k = 0; k < dims.n_bottom; ++k) {
            f.b(i, k) = src.B[k];
            f.w(i, k) = src.q[k];
          }
        }
        InversionOptions local = opt;
        local.use_lut = false;
        local.simplex.rng_seed = opt.simplex.rng_seed + 7919 * p;
        trials[t][p] = center_result(invert_region(*region, start, optics, local),
                                     region->center_slot())
                           .H;
      } catch (const Error &e) {
        warn("trial " + std::to_string(t) + ", pixel " + std::to_string(p) +
             ": " + e.what());
      }
    }
  };
  run_batched(cfg.n_trials, cfg.jobs, run_trial);

  // Deviations are taken from the first finite trial, so identical trials
  // give exactly zero.
  std::vector<double> sigma(n, kNaN);
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0, shift = kNaN;
    std::size_t m = 0;
    for (const auto &tr : trials)
      if (std::isfinite(tr[p])) {
        if (m == 0)
          shift = tr[p];
        s += tr[p] - shift;
        ++m;
      }
    if (m < 2)
      continue;
    const double mean = s / static_cast<double>(m);
    double ss = 0.0;
    for (const auto &tr : trials)
      if (std::isfinite(tr[p]))
        ss += (tr[p] - shift - mean) * (tr[p] - shift - mean);
    sigma[p] = cfg.alpha * std::sqrt(ss / static_cast<double>(m));
  }
  return sigma;
}

std::vector<double> tide_correct(std::span<const double> H, double tide,
                                 double datum_offset) {
  if (!std::isfinite(tide) || !std::isfinite(datum_offset))
    throw UsageError("tide and datum offsets must be finite");
  std::vector<double> out(H.begin(), H.end());
  for (auto &h : out)
    h += tide + datum_offset;
  return out;
}

PipelineResult run_pipeline(std::span<const Scene> scenes,
                            const StackInputs &in, const SoundingSet &soundings,
                            const PipelineOptions &opt) {
  if (scenes.empty())
    throw UsageError("pipeline needs at least one scene");
  if (!in.deep_stats.empty() && in.deep_stats.size() != scenes.size())
    throw UsageError("one set of deep-water statistics is needed per scene");
  const Scene &ref = scenes.front();
  PipelineResult out;
  out.iterations.combinations = scene_combinations(scenes.size(), opt.max_combination);
  const auto &combos = out.iterations.combinations;
  out.iterations.results.resize(combos.size());
  out.reports.resize(combos.size());

  run_batched(combos.size(), opt.jobs, [&](std::size_t i) {
    std::vector<Scene> sub;
    StackInputs local{in.library, in.depth_prior, {}};
    for (auto s : combos[i]) {
      sub.push_back(scenes[s]);
      if (!in.deep_stats.empty())
        local.deep_stats.push_back(in.deep_stats[s]);
    }
    auto r = run_scene_stack(sub, local, opt.inversion);
    out.iterations.results[i] = std::move(r.fits);
    out.reports[i] = std::move(r.report);
  });

  std::vector<double> H = weighted_median_depth(out.iterations, opt.weighted_median);
  if (opt.align && !soundings.points.empty()) {
    std::vector<std::vector<double>> rasters;
    for (const auto &r : out.iterations.results)
      rasters.push_back(r.depth());
    out.alignment = align_depths(rasters, ref.width(), ref.height(),
                                 ref.meta().geotransform, soundings,
                                 opt.inversion.simplex);
    if (out.alignment)
      H = out.alignment->depth;
  }

  const auto stats = resolve_deep_stats(scenes, in.deep_stats);
  out.Y = particle_exponents(stats, ref.bands(), opt.inversion);
  out.k = average_k(out.iterations, ref.bands(), out.Y,
                    opt.inversion.gelbstoff_slope);
  if (opt.unmix) {
    const auto col = fixed_water_column(out.iterations, scenes.size(),
                                        ref.width(), ref.height());
    out.bottom = unmix_bottom(scenes, col, H, out.Y,
                              opt.inversion.gelbstoff_slope, in.library,
                              opt.unmixing);
  }
  out.depth = tide_correct(H, 0.0, opt.datum_offset);
  return out;
}

} // namespace sdb
