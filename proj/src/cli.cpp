#include "sdb/cli.hpp"

#include "sdb/config.hpp"
#include "sdb/empirical_depth.hpp"
#include "sdb/error.hpp"
#include "sdb/pipeline.hpp"
#include "sdb/report.hpp"
#include "sdb/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

namespace sdb {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool sequential = false;
  bool no_lut = false;
  std::optional<std::size_t> jobs;
  std::vector<std::string> sets;

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : RunConfig::load(config);
    for (const auto &kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw UsageError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed)
      c.rng_seed = *seed;
    if (no_lut)
      c.inversion.use_lut = false;
    if (jobs)
      c.jobs = *jobs;
    if (sequential)
      c.jobs = 1;
    c.inversion.simplex.rng_seed = c.rng_seed;
    c.inversion.jobs = c.jobs;
    c.depth_error.rng_seed = c.rng_seed;
    c.depth_error.jobs = c.jobs;
    c.validate();
    return c;
  }
};

struct StackArgs {
  std::vector<std::string> scenes;
  std::vector<std::string> deep;
};

void add_stack_options(CLI::App *cmd, StackArgs &a) {
  cmd->add_option("--scene", a.scenes, "scene rasters (.json sidecar or stem)")
      ->required();
  cmd->add_option("--deep", a.deep,
                  "optically deep patches, one per scene; darkest pixels are "
                  "used when omitted");
}

std::vector<Scene> load_scenes(const std::vector<std::string> &paths) {
  std::vector<Scene> out;
  for (const auto &p : paths)
    out.push_back(io::read_scene(p));
  for (const auto &s : out)
    if (s.width() != out.front().width() || s.height() != out.front().height() ||
        !(s.bands() == out.front().bands()))
      throw DataError("scenes are not co-registered on one band set");
  return out;
}

std::vector<DeepWaterStats> load_deep(const std::vector<std::string> &paths,
                                      std::size_t n_scenes) {
  if (paths.empty())
    return {};
  if (paths.size() != n_scenes)
    throw UsageError("give one --deep patch per --scene");
  std::vector<DeepWaterStats> out;
  for (const auto &p : paths) {
    const Scene deep = io::read_scene(p);
    std::vector<std::size_t> px(deep.pixels());
    std::iota(px.begin(), px.end(), 0);
    out.push_back(empirical::deep_water_stats(deep, px));
  }
  return out;
}

Raster single_layer(std::span<const double> v, std::size_t w, std::size_t h,
                    const SceneMetadata &meta, const std::string &name) {
  Raster r(w, h, {name});
  r.meta = meta;
  for (std::size_t p = 0; p < v.size(); ++p)
    r.at(0, p) = std::isfinite(v[p]) ? static_cast<float>(v[p]) : meta.nodata;
  return r;
}

Raster multi_layer(const std::vector<std::vector<double>> &layers,
                   const std::vector<std::string> &names, std::size_t w,
                   std::size_t h, const SceneMetadata &meta) {
  Raster r(w, h, names);
  r.meta = meta;
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (std::size_t p = 0; p < w * h; ++p)
      r.at(l, p) = std::isfinite(layers[l][p]) ? static_cast<float>(layers[l][p])
                                               : meta.nodata;
  return r;
}

std::vector<double> read_layer(const fs::path &path, const std::string &layer) {
  const Raster r = io::read_raster(path);
  const std::size_t l = r.layer_index(layer);
  std::vector<double> out(r.pixels());
  for (std::size_t p = 0; p < r.pixels(); ++p) {
    const float v = r.at(l, p);
    out[p] = v == r.meta.nodata || !std::isfinite(v)
                 ? std::numeric_limits<double>::quiet_NaN()
                 : v;
  }
  return out;
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << text;
}

fs::path with_suffix(const fs::path &prefix, const std::string &suffix) {
  fs::path p = prefix;
  p += suffix;
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  return p;
}

// --- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out = "synthetic";
  std::size_t width = 32, height = 32, scenes = 2;
  double depth_min = 1.0, depth_max = 25.0;
  std::optional<double> depth_const;
  double noise = 0.0;
  std::vector<double> bands{443, 483, 561, 655};
  std::string bottom = "sand";
  double albedo = 0.3;
  double P = 0.02, G = 0.02, X = 0.005, delta = 0.0005;
  double sun = 55.0, sun_step = -5.0, tide_step = 0.0;
  std::size_t soundings = 0;
  std::size_t deep_size = 8;
};

int cmd_synth(const SynthArgs &a, const RunConfig &cfg) {
  SyntheticTruth t;
  t.width = a.width;
  t.height = a.height;
  t.bands = BandSet(a.bands);
  const BottomLibrary lib = cfg.library();
  t.library = lib;
  const auto names = lib.names();
  const auto it = std::find(names.begin(), names.end(), a.bottom);
  if (it == names.end())
    throw UsageError("--bottom '" + a.bottom + "' is not among the configured bottom_types");
  t.noise = a.noise;
  t.seed = cfg.rng_seed;
  for (std::size_t j = 0; j < a.scenes; ++j) {
    SceneMetadata m;
    m.scene_id = "synthetic_" + std::to_string(j);
    m.date = "2020-01-" + std::string(j + 1 < 10 ? "0" : "") + std::to_string(j + 1);
    m.sun_elevation = a.sun + a.sun_step * static_cast<double>(j);
    m.tide_offset = a.tide_step * static_cast<double>(j);
    t.scenes.push_back(m);
    WaterColumn w{a.P, a.G, a.X, a.delta, cfg.inversion.gelbstoff_slope, 1.0};
    w.Y = cfg.inversion.particle_exponent
              ? *cfg.inversion.particle_exponent
              : self_consistent_Y(w, t.bands,
                                  Geometry::from_above_surface(m.sun_elevation));
    t.water.push_back(w);
  }
  t.H = a.depth_const ? std::vector<double>(t.pixels(), *a.depth_const)
                      : depth_ramp(a.width, a.height, a.depth_min, a.depth_max);
  fill_single_bottom(t, static_cast<std::size_t>(it - names.begin()), a.albedo);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const auto scenes = generate_synthetic(t);
  for (std::size_t j = 0; j < scenes.size(); ++j)
    io::write_scene(dir / ("scene_" + std::to_string(j)), scenes[j]);

  SyntheticTruth deep = t;
  deep.width = deep.height = a.deep_size;
  deep.H.assign(deep.pixels(), 200.0);
  deep.seed = t.seed + 1000003;
  fill_single_bottom(deep, 0, 0.0);
  const auto deep_scenes = generate_synthetic(deep);
  for (std::size_t j = 0; j < deep_scenes.size(); ++j)
    io::write_scene(dir / ("deep_" + std::to_string(j)), deep_scenes[j]);

  write_truth(dir / "truth_params.json", t);
  io::write_raster(dir / "truth_depth",
                   single_layer(t.H, t.width, t.height, t.scenes.front(), "H"));
  if (a.soundings > 0) {
    std::mt19937_64 rng(t.seed + 17);
    std::uniform_int_distribution<std::size_t> pick(0, t.pixels() - 1);
    SoundingSet s;
    for (std::size_t i = 0; i < a.soundings; ++i) {
      const std::size_t p = pick(rng);
      const auto xy = t.scenes.front().geotransform.to_world(
          static_cast<double>(p % t.width) + 0.5,
          static_cast<double>(p / t.width) + 0.5);
      s.points.push_back({xy[0], xy[1], t.H[p]});
    }
    io::write_soundings(dir / "soundings.csv", s);
  }
  std::cout << "wrote " << scenes.size() << " scenes to " << dir.string() << "\n";
  return kExitOk;
}

// --- fit-empirical ----------------------------------------------------------

int cmd_fit_empirical(const StackArgs &a, const std::string &soundings_path,
                      const std::string &out, const RunConfig &cfg) {
  const auto scenes = load_scenes(a.scenes);
  auto stats = load_deep(a.deep, scenes.size());
  if (stats.empty())
    for (const auto &s : scenes)
      stats.push_back(darkest_pixel_stats(s));
  const auto soundings = io::read_soundings(soundings_path);
  std::vector<std::vector<double>> depths;
  std::vector<double> errors, tides;
  nlohmann::json coeffs = nlohmann::json::array();
  SimplexConfig sc = cfg.inversion.simplex;
  for (std::size_t j = 0; j < scenes.size(); ++j) {
    const auto c = empirical::fit_empirical(scenes[j], stats[j], soundings, sc);
    // Soundings are datum depths; the fit is per scene, so remove the tide
    // again before synthesis adds it back.
    auto d = empirical::predict_depths(c, scenes[j], stats[j]);
    for (auto &h : d)
      h -= scenes[j].meta().tide_offset;
    depths.push_back(std::move(d));
    errors.push_back(c.fit_error);
    tides.push_back(scenes[j].meta().tide_offset);
    coeffs.push_back({{"scene", scenes[j].meta().scene_id},
                      {"h", c.h},
                      {"fit_error", c.fit_error},
                      {"soundings_used", c.soundings_used}});
  }
  const auto H = empirical::synthesize_depths(depths, errors, tides);
  const auto &ref = scenes.front();
  io::write_raster(with_suffix(out, "_depth"),
                   single_layer(H, ref.width(), ref.height(), ref.meta(), "H"));
  write_text(with_suffix(out, "_coefficients.json"), coeffs.dump(2) + "\n");
  return kExitOk;
}

// --- invert -----------------------------------------------------------------

int cmd_invert(const StackArgs &a, const std::string &prior,
               const std::string &out, const RunConfig &cfg) {
  const auto scenes = load_scenes(a.scenes);
  StackInputs in{cfg.library(), {}, load_deep(a.deep, scenes.size())};
  if (!prior.empty())
    in.depth_prior = read_layer(prior, "H");
  auto r = run_scene_stack(scenes, in, cfg.inversion);
  io::write_raster(with_suffix(out, "_fit"), r.fits.to_raster());
  write_text(with_suffix(out, "_report.json"), r.report.to_json() + "\n");
  std::cerr << "modelled " << r.report.lut_hits + r.report.optimizer_runs
            << " pixels, LUT hit rate " << r.report.hit_rate() << "\n";
  return r.report.failed == 0 ? kExitOk : kExitNumerical;
}

// --- pipeline ---------------------------------------------------------------

int cmd_pipeline(const StackArgs &a, const std::string &soundings_path,
                 const std::string &out, const RunConfig &cfg) {
  const auto scenes = load_scenes(a.scenes);
  StackInputs in{cfg.library(), {}, load_deep(a.deep, scenes.size())};
  SoundingSet soundings;
  if (!soundings_path.empty())
    soundings = io::read_soundings(soundings_path);
  const auto opt = cfg.pipeline();
  const auto r = run_pipeline(scenes, in, soundings, opt);

  const fs::path dir = out;
  fs::create_directories(dir);
  const auto &ref = scenes.front();
  nlohmann::json report;
  for (std::size_t i = 0; i < r.iterations.combinations.size(); ++i) {
    std::string tag;
    for (auto s : r.iterations.combinations[i])
      tag += std::to_string(s);
    io::write_raster(dir / ("combination_" + tag), r.iterations.results[i].to_raster());
    report["combinations"].push_back(
        {{"scenes", r.iterations.combinations[i]},
         {"run", nlohmann::json::parse(r.reports[i].to_json())}});
  }
  io::write_raster(dir / "depth",
                   single_layer(r.depth, ref.width(), ref.height(), ref.meta(), "H"));
  std::vector<std::string> knames;
  for (double c : ref.bands().centers())
    knames.push_back("k_" + std::to_string(static_cast<int>(std::lround(c))));
  auto klayers = r.k.per_band;
  klayers.push_back(r.k.minimum);
  knames.push_back("k_min");
  io::write_raster(dir / "attenuation",
                   multi_layer(klayers, knames, ref.width(), ref.height(), ref.meta()));
  if (r.bottom) {
    std::vector<std::vector<double>> layers;
    std::vector<std::string> names;
    const auto lib_names = in.library.names();
    const std::size_t n = ref.pixels();
    std::vector<double> albedo(n), err(n);
    for (std::size_t t = 0; t < r.bottom->n_bottom; ++t) {
      std::vector<double> f(n, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t p = 0; p < n; ++p)
        if (r.bottom->quality[p] == Quality::Ok)
          f[p] = r.bottom->pixels[p].fractions[t];
      layers.push_back(std::move(f));
      names.push_back("fraction_" + lib_names[t]);
    }
    for (std::size_t p = 0; p < n; ++p) {
      const bool ok = r.bottom->quality[p] == Quality::Ok;
      albedo[p] = ok ? r.bottom->pixels[p].albedo : std::nan("");
      err[p] = ok ? r.bottom->pixels[p].e_unmixed : std::nan("");
    }
    layers.push_back(albedo);
    names.push_back("albedo");
    layers.push_back(err);
    names.push_back("e_unmixed");
    io::write_raster(dir / "bottom",
                     multi_layer(layers, names, ref.width(), ref.height(), ref.meta()));
  }
  if (r.alignment) {
    const auto &k = r.alignment->coefficients;
    report["alignment"] = {{"c", k.c}, {"a", k.a}, {"b", k.b},
                           {"fit_error", k.fit_error},
                           {"soundings_used", k.soundings_used}};
  }
  report["particle_exponent"] = r.Y;
  write_text(dir / "report.json", report.dump(2) + "\n");
  if (!soundings.points.empty()) {
    try {
      const auto reg = regression_report(r.depth, ref.width(), ref.height(),
                                         ref.meta().geotransform, soundings);
      write_text(dir / "regression.txt", reg.to_text());
    } catch (const UsageError &e) {
      warn(std::string("no regression report: ") + e.what());
    }
  }
  std::cout << "wrote " << r.iterations.combinations.size()
            << " combination fits and the median depth to " << dir.string() << "\n";
  return kExitOk;
}

// --- depth-error ------------------------------------------------------------

int cmd_depth_error(const StackArgs &a, const std::string &out,
                    const RunConfig &cfg) {
  const auto scenes = load_scenes(a.scenes);
  StackInputs in{cfg.library(), {}, load_deep(a.deep, scenes.size())};
  const auto base = run_scene_stack(scenes, in, cfg.inversion);
  const auto sigma = depth_error_estimate(scenes, in, cfg.inversion, base.fits,
                                          cfg.depth_error);
  const auto &ref = scenes.front();
  io::write_raster(with_suffix(out, "_sigma"),
                   single_layer(sigma, ref.width(), ref.height(), ref.meta(), "sigma_H"));
  io::write_raster(with_suffix(out, "_fit"), base.fits.to_raster());
  return kExitOk;
}

// --- unmix ------------------------------------------------------------------

int cmd_unmix(const StackArgs &a, const std::string &fit_path, bool exhaustive,
              const std::string &out, const RunConfig &cfg) {
  const auto scenes = load_scenes(a.scenes);
  const auto stats = resolve_deep_stats(scenes, load_deep(a.deep, scenes.size()));
  const auto Y = particle_exponents(stats, scenes.front().bands(), cfg.inversion);
  const FitRaster fit = FitRaster::from_raster(io::read_raster(fit_path));
  if (fit.n_scenes != scenes.size() || fit.size() != scenes.front().pixels())
    throw DataError("fit raster does not match the scenes");
  IterationSet one;
  Combination all(scenes.size());
  std::iota(all.begin(), all.end(), 0);
  one.combinations.push_back(all);
  one.results.push_back(fit);
  const auto &ref = scenes.front();
  const auto col = fixed_water_column(one, scenes.size(), ref.width(), ref.height());
  const auto H = fit.depth();
  UnmixOptions uo = cfg.pipeline().unmixing;

  std::vector<std::vector<double>> layers;
  std::vector<std::string> names;
  const std::size_t n = ref.pixels();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (exhaustive) {
    const BottomLibrary lib = cfg.bottom_dir.empty()
                                  ? tables::builtin_bottom_library()
                                  : read_bottom_library(cfg.bottom_dir);
    std::vector<double> first(n, nan), second(n, nan), f1(n, nan), albedo(n, nan),
        err(n, nan);
    for (std::size_t p = 0; p < n; ++p) {
      const auto rho = unmixed_albedo(scenes, col, Y, cfg.inversion.gelbstoff_slope,
                                      H[p], p);
      if (!rho)
        continue;
      const auto s = exhaustive_bottom_search(*rho, ref.bands().size(),
                                              ref.bands(), lib, uo);
      first[p] = static_cast<double>(s.members[0]);
      second[p] = s.members.size() > 1 ? static_cast<double>(s.members[1]) : -1.0;
      f1[p] = s.fit.fractions[0];
      albedo[p] = s.fit.albedo;
      err[p] = s.fit.e_unmixed;
    }
    layers = {first, second, f1, albedo, err};
    names = {"member_0", "member_1", "fraction_0", "albedo", "e_unmixed"};
  } else {
    const auto lib = cfg.library();
    const auto r = unmix_bottom(scenes, col, H, Y, cfg.inversion.gelbstoff_slope,
                                lib, uo);
    for (std::size_t t = 0; t < lib.size(); ++t) {
      std::vector<double> f(n, nan);
      for (std::size_t p = 0; p < n; ++p)
        if (r.quality[p] == Quality::Ok)
          f[p] = r.pixels[p].fractions[t];
      layers.push_back(std::move(f));
      names.push_back("fraction_" + lib.names()[t]);
    }
    std::vector<double> albedo(n, nan), err(n, nan);
    for (std::size_t p = 0; p < n; ++p)
      if (r.quality[p] == Quality::Ok) {
        albedo[p] = r.pixels[p].albedo;
        err[p] = r.pixels[p].e_unmixed;
      }
    layers.push_back(albedo);
    names.push_back("albedo");
    layers.push_back(err);
    names.push_back("e_unmixed");
  }
  io::write_raster(with_suffix(out, "_bottom"),
                   multi_layer(layers, names, ref.width(), ref.height(), ref.meta()));
  return kExitOk;
}

// --- report -----------------------------------------------------------------

int cmd_report(const std::string &depth_path, const std::string &layer,
               const std::string &soundings_path, bool json) {
  const Raster r = io::read_raster(depth_path);
  const auto H = read_layer(depth_path, layer);
  const auto reg = regression_report(H, r.width, r.height, r.meta.geotransform,
                                     io::read_soundings(soundings_path));
  std::cout << (json ? reg.to_json() + "\n" : reg.to_text());
  return kExitOk;
}

} // namespace

int run_cli(int argc, char **argv) {
  CLI::App app{"Satellite-derived bathymetry by multi-scene model inversion", "sdb"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "key = value configuration file");
  app.add_option("--set", common.sets, "override one config key (key=value)");
  app.add_option("--seed", common.seed, "random seed");
  app.add_flag("--sequential", common.sequential,
               "single-threaded deterministic mode");
  app.add_flag("--no-lut", common.no_lut, "disable the dynamic lookup table");
  app.add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);

  SynthArgs sa;
  auto *synth = app.add_subcommand("synth", "generate synthetic scenes with known truth");
  synth->add_option("--out", sa.out, "output directory");
  synth->add_option("--width", sa.width);
  synth->add_option("--height", sa.height);
  synth->add_option("--scenes", sa.scenes)->check(CLI::Range(1, 16));
  synth->add_option("--depth-min", sa.depth_min);
  synth->add_option("--depth-max", sa.depth_max);
  synth->add_option("--depth", sa.depth_const, "constant depth instead of a ramp");
  synth->add_option("--noise", sa.noise, "uniform noise half-width, sr^-1");
  synth->add_option("--bands", sa.bands, "band centres, nm")->delimiter(',');
  synth->add_option("--bottom", sa.bottom, "bottom type");
  synth->add_option("--albedo", sa.albedo, "bottom albedo at 550 nm");
  synth->add_option("--P", sa.P);
  synth->add_option("--G", sa.G);
  synth->add_option("--X", sa.X);
  synth->add_option("--delta", sa.delta);
  synth->add_option("--sun", sa.sun, "sun elevation of the first scene, degrees");
  synth->add_option("--sun-step", sa.sun_step);
  synth->add_option("--tide-step", sa.tide_step, "tide offset increment per scene, m");
  synth->add_option("--soundings", sa.soundings, "number of soundings to sample");

  StackArgs stack;
  std::string out = "out", soundings, prior, fit_path, depth_path, layer = "H";
  bool exhaustive = false, json = false;

  auto *fit_emp = app.add_subcommand("fit-empirical", "log-linear depth from soundings");
  add_stack_options(fit_emp, stack);
  fit_emp->add_option("--soundings", soundings, "CSV x,y,depth_m")->required();
  fit_emp->add_option("--out", out, "output prefix");

  auto *invert = app.add_subcommand("invert", "invert one scene combination");
  add_stack_options(invert, stack);
  invert->add_option("--depth-prior", prior, "depth raster used to seed H");
  invert->add_option("--out", out, "output prefix");

  auto *pipe = app.add_subcommand("pipeline", "all combinations, median depth, k, bottom");
  add_stack_options(pipe, stack);
  pipe->add_option("--soundings", soundings, "CSV for alignment and regression");
  pipe->add_option("--out", out, "output directory");

  auto *derr = app.add_subcommand("depth-error", "Monte-Carlo depth uncertainty");
  add_stack_options(derr, stack);
  derr->add_option("--out", out, "output prefix");
  std::optional<std::size_t> trials;
  std::optional<double> noise_scale, alpha;
  derr->add_option("--trials", trials);
  derr->add_option("--noise-scale", noise_scale);
  derr->add_option("--alpha", alpha);

  auto *unmix = app.add_subcommand("unmix", "bottom composition from a fit raster");
  add_stack_options(unmix, stack);
  unmix->add_option("--fit", fit_path, "fit raster from invert")->required();
  unmix->add_flag("--exhaustive", exhaustive,
                  "search every library member and pair");
  unmix->add_option("--out", out, "output prefix");

  auto *report = app.add_subcommand("report", "regression against soundings");
  report->add_option("--depth", depth_path, "depth raster")->required();
  report->add_option("--layer", layer, "layer name");
  report->add_option("--soundings", soundings, "CSV x,y,depth_m")->required();
  report->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = common.resolve();
    if (trials)
      cfg.depth_error.n_trials = *trials;
    if (noise_scale)
      cfg.depth_error.noise_scale = *noise_scale;
    if (alpha)
      cfg.depth_error.alpha = *alpha;
    if (*synth)
      return cmd_synth(sa, cfg);
    if (*fit_emp)
      return cmd_fit_empirical(stack, soundings, out, cfg);
    if (*invert)
      return cmd_invert(stack, prior, out, cfg);
    if (*pipe)
      return cmd_pipeline(stack, soundings, out, cfg);
    if (*derr)
      return cmd_depth_error(stack, out, cfg);
    if (*unmix)
      return cmd_unmix(stack, fit_path, exhaustive, out, cfg);
    if (*report)
      return cmd_report(depth_path, layer, soundings, json);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception &e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

} // namespace sdb
