#include "sdb/config.hpp"

#include "sdb/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sdb {

namespace {

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return d;
  } catch (const std::exception &) {
    throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_count(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("config key '" + key +
                     "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw UsageError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string &v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;
using Getter = std::function<std::string(const RunConfig &)>;

struct Key {
  Setter set;
  Getter get;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

#define SDB_DOUBLE(name, field)                                                \
  {name,                                                                       \
   {[](RunConfig &c, const std::string &k, const std::string &v) {             \
      c.field = to_double(k, v);                                               \
    },                                                                         \
    [](const RunConfig &c) { return fmt(c.field); }}}
#define SDB_COUNT(name, field)                                                 \
  {name,                                                                       \
   {[](RunConfig &c, const std::string &k, const std::string &v) {             \
      c.field = static_cast<decltype(c.field)>(to_count(k, v));                \
    },                                                                         \
    [](const RunConfig &c) { return std::to_string(c.field); }}}
#define SDB_BOOL(name, field)                                                  \
  {name,                                                                       \
   {[](RunConfig &c, const std::string &k, const std::string &v) {             \
      c.field = to_bool(k, v);                                                 \
    },                                                                         \
    [](const RunConfig &c) { return std::string(c.field ? "true" : "false"); }}}

const std::map<std::string, Key> &keys() {
  static const std::map<std::string, Key> k = {
      SDB_COUNT("region_radius", inversion.region_radius),
      SDB_COUNT("n_bottom", inversion.n_bottom),
      {"bottom_types",
       {[](RunConfig &c, const std::string &, const std::string &v) {
          c.bottom_types = split_list(v);
        },
        [](const RunConfig &c) {
          std::string s;
          for (const auto &t : c.bottom_types)
            s += (s.empty() ? "" : ",") + t;
          return s;
        }}},
      {"bottom_dir",
       {[](RunConfig &c, const std::string &, const std::string &v) {
          c.bottom_dir = v;
        },
        [](const RunConfig &c) { return c.bottom_dir; }}},
      SDB_DOUBLE("P_min", inversion.ranges.P_min),
      SDB_DOUBLE("P_max", inversion.ranges.P_max),
      SDB_DOUBLE("G_min", inversion.ranges.G_min),
      SDB_DOUBLE("G_max", inversion.ranges.G_max),
      SDB_DOUBLE("X_min", inversion.ranges.X_min),
      SDB_DOUBLE("X_max", inversion.ranges.X_max),
      SDB_DOUBLE("delta_min", inversion.ranges.delta_min),
      SDB_DOUBLE("delta_max", inversion.ranges.delta_max),
      SDB_DOUBLE("H_min", inversion.ranges.H_min),
      SDB_DOUBLE("H_max", inversion.ranges.H_max),
      SDB_DOUBLE("B_min", inversion.ranges.B_min),
      SDB_DOUBLE("B_max", inversion.ranges.B_max),
      SDB_DOUBLE("q_min", inversion.ranges.q_min),
      SDB_DOUBLE("q_max", inversion.ranges.q_max),
      SDB_DOUBLE("omega0", inversion.weights.omega0),
      SDB_DOUBLE("omega1", inversion.weights.omega1),
      SDB_DOUBLE("kappa", inversion.weights.kappa),
      SDB_BOOL("use_lut", inversion.use_lut),
      SDB_DOUBLE("lut_match_threshold", inversion.lut_match_threshold),
      SDB_DOUBLE("hot_start_threshold", inversion.hot_start_threshold),
      SDB_COUNT("max_iterations", inversion.simplex.max_iterations),
      SDB_DOUBLE("f_tolerance", inversion.simplex.f_tolerance),
      SDB_DOUBLE("x_tolerance", inversion.simplex.x_tolerance),
      SDB_COUNT("restarts", inversion.simplex.restarts),
      SDB_DOUBLE("initial_scale", inversion.simplex.initial_scale),
      SDB_BOOL("adaptive_simplex", inversion.simplex.adaptive),
      SDB_BOOL("log_scaling", inversion.simplex.log_scaling),
      SDB_COUNT("ladder_screen_iterations", inversion.ladder_screen_iterations),
      {"particle_exponent",
       {[](RunConfig &c, const std::string &k, const std::string &v) {
          if (v == "auto")
            c.inversion.particle_exponent.reset();
          else
            c.inversion.particle_exponent = to_double(k, v);
        },
        [](const RunConfig &c) {
          return c.inversion.particle_exponent ? fmt(*c.inversion.particle_exponent)
                                               : std::string("auto");
        }}},
      SDB_DOUBLE("gelbstoff_slope", inversion.gelbstoff_slope),
      SDB_COUNT("max_combination", max_combination),
      SDB_BOOL("weighted_median", weighted_median),
      SDB_BOOL("unmix", unmix),
      SDB_BOOL("align", align),
      SDB_DOUBLE("datum_offset", datum_offset),
      SDB_COUNT("mc_trials", depth_error.n_trials),
      SDB_DOUBLE("mc_noise_scale", depth_error.noise_scale),
      SDB_DOUBLE("mc_alpha", depth_error.alpha),
      SDB_COUNT("rng_seed", rng_seed),
      SDB_COUNT("jobs", jobs),
  };
  return k;
}

#undef SDB_DOUBLE
#undef SDB_COUNT
#undef SDB_BOOL

} // namespace

void RunConfig::set(const std::string &key, const std::string &value) {
  const auto it = keys().find(key);
  if (it == keys().end())
    throw UsageError("unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto &[name, k] : keys())
    out += name + " = " + k.get(*this) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string &text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(row) +
                       ": expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError &e) {
      throw UsageError("config line " + std::to_string(row) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

BottomLibrary RunConfig::library() const {
  const BottomLibrary all = bottom_dir.empty()
                                ? tables::builtin_bottom_library()
                                : read_bottom_library(bottom_dir);
  if (inversion.n_bottom > bottom_types.size())
    throw UsageError("n_bottom exceeds the number of listed bottom_types");
  std::vector<std::string> names(bottom_types.begin(),
                                 bottom_types.begin() +
                                     static_cast<long>(inversion.n_bottom));
  return all.select(names);
}

PipelineOptions RunConfig::pipeline() const {
  PipelineOptions p;
  p.inversion = inversion;
  p.inversion.simplex.rng_seed = rng_seed;
  p.max_combination = max_combination;
  p.weighted_median = weighted_median;
  p.unmix = unmix;
  p.align = align;
  p.datum_offset = datum_offset;
  p.unmixing = unmixing;
  p.unmixing.ranges = inversion.ranges;
  p.unmixing.simplex.rng_seed = rng_seed;
  p.jobs = jobs;
  return p;
}

void RunConfig::validate() const {
  inversion.validate();
  if (max_combination == 0)
    throw UsageError("max_combination must be at least 1");
  if (depth_error.n_trials < 2)
    throw UsageError("mc_trials must be at least 2");
  if (jobs == 0)
    throw UsageError("jobs must be at least 1");
  if (inversion.n_bottom > bottom_types.size())
    throw UsageError("n_bottom exceeds the number of listed bottom_types");
}

} // namespace sdb
