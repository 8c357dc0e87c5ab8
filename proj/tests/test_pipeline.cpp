#include "fixtures.hpp"

#include "sdb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

using namespace sdb;
using namespace sdb::testing;
using doctest::Approx;

TEST_CASE("scene combinations") {
  CHECK(scene_combinations(4).size() == 15);
  CHECK(scene_combinations(1) == std::vector<Combination>{{0}});
  CHECK(scene_combinations(5, 4).size() == 30);
  const auto c = scene_combinations(3);
  const std::vector<Combination> expected{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  CHECK(c == expected);
  CHECK(scene_combinations(4, 2).size() == 10);
}

// Smallest value whose cumulative weight reaches half the total.
static double median_oracle(const std::vector<double> &v, const std::vector<double> &w) {
  double total = 0.0;
  for (double x : w)
    total += x;
  double best = INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (v[j] <= v[i])
        below += w[j];
    if (below >= 0.5 * total)
      best = std::min(best, v[i]);
  }
  return best;
}

TEST_CASE("weighted median") {
  CHECK(weighted_median(std::vector<double>{10, 11, 30}, std::vector<double>{1, 2, 1}) == 11);
  CHECK(weighted_median(std::vector<double>{10, 20}, std::vector<double>{1, 1}) == 10);
  CHECK(weighted_median(std::vector<double>{7}, std::vector<double>{3}) == 7);
  CHECK_THROWS_AS(weighted_median(std::vector<double>{1, 2}, std::vector<double>{1}),
                  UsageError);
  CHECK_THROWS_AS(weighted_median(std::vector<double>{1, 2}, std::vector<double>{1, 0}),
                  UsageError);
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 10), weight(1, 4), value(0, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size(rng);
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = value(rng) * 0.5;
      w[i] = weight(rng);
    }
    CHECK(weighted_median(v, w) == median_oracle(v, w));
  }
}

static FitRaster constant_fit(std::size_t n, std::size_t scenes, double H) {
  FitRaster f(n, 1, scenes, 2);
  for (auto &p : f.pixels) {
    p.P.assign(scenes, 0.02);
    p.G.assign(scenes, 0.02);
    p.X.assign(scenes, 0.005);
    p.delta.assign(scenes, 0.0);
    p.B = {0.3, 0.0};
    p.q = {1.0, 1e-3};
    p.H = H;
  }
  std::fill(f.quality.begin(), f.quality.end(), Quality::Ok);
  return f;
}

TEST_CASE("weighted median over combinations") {
  IterationSet one;
  one.combinations = {{0}};
  one.results = {constant_fit(3, 1, 4.5)};
  CHECK(weighted_median_depth(one) == std::vector<double>(3, 4.5));

  IterationSet set;
  set.combinations = {{0}, {0, 1}, {1}};
  set.results = {constant_fit(2, 1, 10), constant_fit(2, 2, 11), constant_fit(2, 1, 30)};
  set.results[2].quality[1] = Quality::Failed;
  const auto d = weighted_median_depth(set);
  CHECK(d[0] == 11);
  CHECK(d[1] == 11);
  set.results[0].quality[1] = Quality::NoData;
  set.results[1].quality[1] = Quality::Failed;
  CHECK(std::isnan(weighted_median_depth(set)[1]));
}

TEST_CASE("depth alignment") {
  AlignmentCoefficients id{{1.0}, {1.0}, {1.0}};
  CHECK(aligned_depth(id, std::vector<double>{7.25}) == 7.25);
  AlignmentCoefficients two{{1.0, 3.0}, {2.0, 1.0}, {1.0, 2.0}};
  CHECK(aligned_depth(two, std::vector<double>{2.0, 3.0}) == Approx((4.0 + 27.0) / 4.0));

  Quiet quiet;
  const std::size_t w = 10, h = 10;
  std::vector<double> truth(w * h), model(w * h);
  SoundingSet soundings;
  for (std::size_t p = 0; p < w * h; ++p) {
    truth[p] = 2.0 + 0.2 * static_cast<double>(p);
    model[p] = 2.0 * truth[p];
    if (p % 3 == 0)
      soundings.points.push_back(
          {static_cast<double>(p % w) + 0.5, static_cast<double>(p / w) + 0.5, truth[p]});
  }
  const std::vector<std::vector<double>> rasters{model};
  SimplexConfig cfg;
  cfg.f_tolerance = 1e-14;
  const auto a = align_depths(rasters, w, h, GeoTransform{}, soundings, cfg);
  REQUIRE(a.has_value());
  CHECK(a->coefficients.fit_error < 1e-4);
  CHECK(a->coefficients.a[0] == Approx(0.5).epsilon(0.02));
  CHECK(a->coefficients.b[0] == Approx(1.0).epsilon(0.02));
  for (std::size_t p = 0; p < w * h; ++p)
    CHECK(a->depth[p] == Approx(truth[p]).epsilon(1e-3));

  SoundingSet outside;
  for (int i = 0; i < 10; ++i)
    outside.points.push_back({100.0 + i, 100.0, 5.0});
  CHECK_FALSE(align_depths(rasters, w, h, GeoTransform{}, outside, cfg).has_value());
}

TEST_CASE("mean attenuation") {
  const BandSet bands({443, 561});
  IterationSet set;
  set.combinations = {{0}, {0}};
  set.results = {constant_fit(1, 1, 5), constant_fit(1, 1, 5)};
  set.results[1].pixels[0].P = {0.2};
  const std::vector<double> Y{1.0};
  const auto k = average_k(set, bands, Y, 0.014);
  for (std::size_t b = 0; b < 2; ++b) {
    const double k0 = forward::total_iops({0.02, 0.02, 0.005, 0.0, 0.014, 1.0}, bands.center(b)).k;
    const double k1 = forward::total_iops({0.2, 0.02, 0.005, 0.0, 0.014, 1.0}, bands.center(b)).k;
    CHECK(k.per_band[b][0] == Approx(0.5 * (k0 + k1)).epsilon(1e-12));
    CHECK(k.minimum[0] <= k.per_band[b][0]);
  }
  IterationSet same;
  same.combinations = {{0}, {0}};
  same.results = {constant_fit(1, 1, 5), constant_fit(1, 1, 5)};
  const auto s = average_k(same, bands, Y, 0.014);
  const auto single = average_k(IterationSet{{{0}}, {constant_fit(1, 1, 5)}}, bands, Y, 0.014);
  CHECK(s.per_band[1][0] == Approx(single.per_band[1][0]).epsilon(1e-15));
}

TEST_CASE("median filter") {
  std::vector<double> v(9, 1.0);
  v[4] = 100.0;
  CHECK(median_filter3(v, 3, 3)[4] == 1.0);
  const std::vector<double> ramp{1, 2, 3, 4, 5, 6};
  // Corner window with clamped edges: {1,1,2,1,1,2,4,4,5}.
  CHECK(median_filter3(ramp, 3, 2)[0] == 2.0);
  std::vector<double> gap(4, std::nan(""));
  gap[0] = 3.0;
  gap[1] = 5.0;
  const auto m = median_filter3(gap, 2, 2);
  CHECK(std::isfinite(m[3]));
  CHECK(std::isnan(median_filter3(std::vector<double>(4, std::nan("")), 2, 2)[0]));
}

static std::vector<double> library_target(const BottomLibrary &lib, const BandSet &bands,
                                          const std::vector<double> &B,
                                          const std::vector<double> &q, std::size_t scenes) {
  std::vector<double> out;
  for (std::size_t j = 0; j < scenes; ++j)
    for (double l : bands.centers())
      out.push_back(forward::bottom_albedo_mix({B, q}, lib, l));
  return out;
}

TEST_CASE("bottom unmixing oracles") {
  const BandSet bands({443, 483, 561, 655});
  const auto full = tables::builtin_bottom_library();
  const auto lib = full.select(std::vector<std::string>{"sand", "seagrass"});
  const BandOptics optics(bands, lib);
  UnmixOptions opt;

  for (std::size_t t = 0; t < 2; ++t) {
    std::vector<double> B{0.0, 0.0}, q{1e-3, 1e-3};
    B[t] = 0.35;
    q[t] = 1.0;
    const auto target = library_target(lib, bands, B, q, 2);
    const auto fit = fit_bottom(target, 4, optics, opt);
    CHECK(fit.fractions[t] > 0.95);
    CHECK(fit.q[t] / (fit.q[0] + fit.q[1]) > 0.95);
    CHECK(fit.B[t] == Approx(0.35).epsilon(0.02));
  }

  const auto half = library_target(lib, bands, {0.3, 0.3}, {1.0, 1.0}, 2);
  const auto mixed = fit_bottom(half, 4, optics, opt);
  CHECK(std::abs(mixed.fractions[0] - 0.5) < 0.1);
  CHECK(std::abs(mixed.fractions[1] - 0.5) < 0.1);

  // One type: least-squares amplitude against the library spectrum.
  const auto sand = full.select(std::vector<std::string>{"sand"});
  const BandOptics one(bands, sand);
  std::vector<double> target{0.09, 0.11, 0.14, 0.12, 0.10, 0.10, 0.15, 0.11};
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = sand[0].value_at(bands.center(i % 4));
    num += target[i] * r;
    den += r * r;
  }
  const auto single = fit_bottom(target, 4, one, opt);
  CHECK(single.B[0] == Approx(num / den).epsilon(1e-6));
  CHECK(single.fractions[0] == 1.0);

  CHECK_THROWS_AS(fit_bottom(std::vector<double>(7, 0.1), 4, optics, opt), UsageError);
}

TEST_CASE("exhaustive bottom search") {
  const BandSet bands({443, 483, 561, 655});
  const auto lib = tables::builtin_bottom_library();
  REQUIRE(lib.size() == 3);
  UnmixOptions opt;
  const auto target = library_target(lib, bands, {0.0, 0.3, 0.0}, {1e-3, 1.0, 1e-3}, 1);
  const auto s = exhaustive_bottom_search(target, 4, bands, lib, opt);
  CHECK(s.candidates == 6);
  CHECK(s.candidate_errors.size() == 6);
  CHECK(s.members == std::vector<std::size_t>{1});
  for (double e : s.candidate_errors)
    CHECK(s.fit.e_unmixed <= e + 1e-6 * e + 1e-15);
  // Re-evaluating the winner gives the recorded error.
  const BandOptics winner(bands, lib.subset(s.members));
  std::vector<double> model(4);
  winner.mix(s.fit.B, s.fit.q, model);
  CHECK(metrics::e_unmixed(model, target, 4) == Approx(s.fit.e_unmixed).epsilon(1e-12));

  const auto one = lib.subset(std::vector<std::size_t>{0});
  CHECK(exhaustive_bottom_search(target, 4, bands, one, opt).candidates == 1);
}

TEST_CASE("tide correction") {
  const std::vector<double> H{17.22, 3.0};
  CHECK(tide_correct(H, 0.0, 0.0) == H);
  CHECK(tide_correct(H, -0.5, -0.25)[0] == Approx(16.47).epsilon(1e-14));
  const auto back = tide_correct(tide_correct(H, 0.4, 0.1), -0.4, -0.1);
  CHECK(back[1] == Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(tide_correct(H, std::nan(""), 0.0), UsageError);
}

TEST_CASE("depth error with zero noise") {
  Quiet quiet;
  auto t = two_scene_truth(2, 2);
  t.H = depth_ramp(2, 2, 6.0, 9.0);
  const auto scenes = generate_synthetic(t);
  StackInputs in{t.library, std::vector<double>(4, 8.0), deep_stats(t)};
  InversionOptions opt;
  opt.use_lut = false;
  opt.simplex.max_iterations = 4000;
  const auto base = run_scene_stack(scenes, in, opt);
  DepthErrorConfig cfg;
  cfg.n_trials = 5;
  cfg.noise_scale = 0.0;
  const auto sigma = depth_error_estimate(scenes, in, opt, base.fits, cfg);
  for (double s : sigma)
    CHECK(s == 0.0);
  cfg.n_trials = 1;
  CHECK_THROWS_AS(depth_error_estimate(scenes, in, opt, base.fits, cfg), UsageError);
}

TEST_CASE("pipeline on a small stack") {
  Quiet quiet;
  auto t = two_scene_truth(3, 3);
  const auto scenes = generate_synthetic(t);
  StackInputs in{t.library, std::vector<double>(9, 10.0), deep_stats(t)};
  PipelineOptions opt;
  opt.inversion.simplex.max_iterations = 300;
  opt.unmixing.simplex.max_iterations = 2000;
  const auto r = run_pipeline(scenes, in, SoundingSet{}, opt);
  CHECK(r.iterations.combinations.size() == 3);
  CHECK(r.reports.size() == 3);
  CHECK(r.depth.size() == 9);
  CHECK_FALSE(r.alignment.has_value());
  REQUIRE(r.bottom.has_value());
  CHECK(r.bottom->pixels.size() == 9);
  CHECK(r.k.minimum.size() == 9);
}
