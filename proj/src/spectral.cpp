#include "sdb/spectral.hpp"

#include "sdb/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

namespace sdb {

namespace {

WarningSink &warning_sink() {
  static WarningSink sink = [](const std::string &m) {
    std::cerr << "warning: " << m << '\n';
  };
  return sink;
}

std::mutex &warning_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> grid(double first, double last, double step) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::llround((last - first) / step));
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    out.push_back(first + step * static_cast<double>(i));
  return out;
}

} // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(warning_mutex());
  return std::exchange(warning_sink(), std::move(sink));
}

void warn(const std::string &message) {
  std::lock_guard lock(warning_mutex());
  if (warning_sink())
    warning_sink()(message);
}

LookupCurve::LookupCurve(std::string name, std::vector<double> wavelengths,
                         std::vector<double> values)
    : name_(std::move(name)), wavelengths_(std::move(wavelengths)),
      values_(std::move(values)) {
  if (wavelengths_.size() != values_.size())
    throw UsageError("curve '" + name_ + "': " +
                     std::to_string(wavelengths_.size()) + " wavelengths but " +
                     std::to_string(values_.size()) + " values");
  if (wavelengths_.empty())
    throw UsageError("curve '" + name_ + "' is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || !std::isfinite(wavelengths_[i]))
      throw DataError("curve '" + name_ + "' has a non-finite entry at row " +
                      std::to_string(i));
    if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1]))
      throw DataError("curve '" + name_ +
                      "': wavelengths not strictly increasing at row " +
                      std::to_string(i));
  }
}

double LookupCurve::value_at(double lambda) const {
  if (!covers(lambda)) {
    std::ostringstream os;
    os << "curve '" << name_ << "' evaluated at " << lambda
       << " nm, outside [" << min_wavelength() << ", " << max_wavelength()
       << "]";
    throw RangeError(os.str());
  }
  const auto it =
      std::lower_bound(wavelengths_.begin(), wavelengths_.end(), lambda);
  const auto hi = static_cast<std::size_t>(it - wavelengths_.begin());
  if (wavelengths_[hi] == lambda)
    return values_[hi];
  const std::size_t lo = hi - 1;
  const double t =
      (lambda - wavelengths_[lo]) / (wavelengths_[hi] - wavelengths_[lo]);
  return values_[lo] + t * (values_[hi] - values_[lo]);
}

LookupCurve LookupCurve::scaled(double factor) const {
  std::vector<double> v(values_);
  for (auto &x : v)
    x *= factor;
  return LookupCurve(name_, wavelengths_, std::move(v));
}

BandSet::BandSet(std::vector<double> centers, std::vector<std::string> names)
    : centers_(std::move(centers)), names_(std::move(names)) {
  if (centers_.empty())
    throw UsageError("band set is empty");
  for (std::size_t i = 1; i < centers_.size(); ++i)
    if (!(centers_[i] > centers_[i - 1]))
      throw UsageError("band centres must be strictly increasing");
  if (!names_.empty() && names_.size() != centers_.size())
    throw UsageError("band names do not match band count");
}

std::size_t BandSet::nearest(double lambda, double max_distance) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < centers_.size(); ++i)
    if (std::abs(centers_[i] - lambda) < std::abs(centers_[best] - lambda))
      best = i;
  if (std::abs(centers_[best] - lambda) > max_distance)
    return centers_.size() - 1;
  return best;
}

double value_at(const LookupCurve &curve, double lambda) {
  return curve.value_at(lambda);
}

Spectrum resample_curve(const LookupCurve &curve, const BandSet &bands) {
  Spectrum out;
  out.values.reserve(bands.size());
  for (double c : bands.centers())
    out.values.push_back(curve.value_at(c));
  return out;
}

std::vector<std::string> BottomLibrary::names() const {
  std::vector<std::string> out;
  for (const auto &c : spectra_)
    out.push_back(c.name());
  return out;
}

BottomLibrary BottomLibrary::subset(std::span<const std::size_t> members) const {
  std::vector<LookupCurve> out;
  for (auto i : members) {
    if (i >= spectra_.size())
      throw UsageError("bottom library has no member " + std::to_string(i));
    out.push_back(spectra_[i]);
  }
  return BottomLibrary(std::move(out));
}

BottomLibrary BottomLibrary::select(std::span<const std::string> names) const {
  std::vector<LookupCurve> out;
  for (const auto &n : names) {
    auto it = std::find_if(spectra_.begin(), spectra_.end(),
                           [&](const LookupCurve &c) { return c.name() == n; });
    if (it == spectra_.end())
      throw UsageError("unknown bottom type '" + n + "'");
    out.push_back(*it);
  }
  return BottomLibrary(std::move(out));
}

BottomLibrary load_bottom_spectra(std::vector<LookupCurve> curves) {
  std::vector<LookupCurve> out;
  out.reserve(curves.size());
  for (auto &c : curves) {
    const double at550 = c.value_at(550.0);
    if (!(at550 > 0.0))
      throw DomainError("bottom spectrum '" + c.name() +
                        "' cannot be normalised: value at 550 nm is " +
                        std::to_string(at550));
    // Divide rather than multiply by the reciprocal so the 550 nm knot is
    // exactly 1.
    std::vector<double> v(c.values().begin(), c.values().end());
    for (auto &x : v)
      x /= at550;
    out.emplace_back(c.name(),
                     std::vector<double>(c.wavelengths().begin(),
                                         c.wavelengths().end()),
                     std::move(v));
  }
  return BottomLibrary(std::move(out));
}

LookupCurve read_curve_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open curve file " + path.string());
  std::vector<double> wl, v;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    double a = 0, b = 0;
    if (!(ls >> a)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos)
        continue;
      throw DataError(path.string() + ":" + std::to_string(row) +
                      ": expected 'wavelength value'");
    }
    if (!(ls >> b))
      throw DataError(path.string() + ":" + std::to_string(row) +
                      ": missing value column");
    wl.push_back(a);
    v.push_back(b);
  }
  return LookupCurve(path.stem().string(), std::move(wl), std::move(v));
}

void write_curve_file(const std::filesystem::path &path,
                      const LookupCurve &curve, const std::string &comment) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write curve file " + path.string());
  std::istringstream cs(comment);
  for (std::string line; std::getline(cs, line);)
    out << "# " << line << '\n';
  out << std::setprecision(10);
  for (std::size_t i = 0; i < curve.wavelengths().size(); ++i)
    out << curve.wavelengths()[i] << ' ' << curve.values()[i] << '\n';
}

BottomLibrary read_bottom_library(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("bottom library " + dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file())
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("bottom library " + dir.string() + " is empty");
  std::vector<LookupCurve> curves;
  for (const auto &f : files)
    curves.push_back(read_curve_file(f));
  return load_bottom_spectra(std::move(curves));
}

namespace tables {

const LookupCurve &a0() {
  static const LookupCurve curve(
      "a0", grid(400, 750, 5),
      {0.69322, 0.80506, 0.89891, 0.96392, 0.99268, 1.00392, 1.02963, 1.03967,
       1.0,     0.90067, 0.79228, 0.74203, 0.74870, 0.76773, 0.77611, 0.76177,
       0.72663, 0.68161, 0.63211, 0.57497, 0.51537, 0.45850, 0.40764, 0.36526,
       0.32875, 0.30033, 0.27633, 0.25874, 0.23621, 0.21342, 0.19724, 0.18247,
       0.16819, 0.15781, 0.15495, 0.15478, 0.15795, 0.16251, 0.16427, 0.16247,
       0.16094, 0.16188, 0.16489, 0.17238, 0.17878, 0.18479, 0.19970, 0.21805,
       0.24139, 0.25922, 0.26483, 0.27135, 0.31442, 0.40322, 0.49153, 0.52301,
       0.46490, 0.33078, 0.19484, 0.11332, 0.07804, 0.05617, 0.04426, 0.03844,
       0.03209, 0.02705, 0.02090, 0.02198, 0.01671, 0.00866, 0.01262});
  return curve;
}

const LookupCurve &a1() {
  static const LookupCurve curve(
      "a1", grid(400, 750, 5),
      {0.01035,  0.01868,  0.02278,  0.02497,  0.02371,  0.01841,  0.01381,
       0.00750,  0.0,      -0.01143, -0.02292, -0.02655, -0.02273, -0.01590,
       -0.00746, -0.00132, -0.00007, -0.00094, -0.00109, -0.00056, 0.00073,
       0.00244,  0.00391,  0.00529,  0.00617,  0.00753,  0.00874,  0.01065,
       0.01005,  0.00897,  0.00975,  0.01048,  0.01044,  0.01023,  0.01076,
       0.01080,  0.01102,  0.01104,  0.01054,  0.01027,  0.01062,  0.01104,
       0.01075,  0.01088,  0.01073,  0.01090,  0.01329,  0.01636,  0.02122,
       0.02508,  0.02589,  0.02374,  0.02326,  0.02714,  0.03177,  0.03344,
       0.02943,  0.01968,  0.01007,  0.00577,  0.00588,  0.00477,  0.00401,
       0.00414,  0.00361,  0.00333,  0.00253,  0.00528,  0.00383,  0.00191,
       0.00288});
  return curve;
}

const LookupCurve &pure_water_absorption() {
  // 400-725 nm: Pope & Fry (1997) sampled at 5 nm.
  // 730-750 nm: Smith & Baker (1981).
  static const LookupCurve curve(
      "a_w", grid(400, 750, 5),
      {0.00663, 0.00530, 0.00473, 0.00444, 0.00454, 0.00478, 0.00495, 0.00530,
       0.00635, 0.00751, 0.00922, 0.00962, 0.00979, 0.01011, 0.01060, 0.01140,
       0.01270, 0.01360, 0.01500, 0.01730, 0.02040, 0.02560, 0.03250, 0.03960,
       0.04090, 0.04170, 0.04340, 0.04520, 0.04740, 0.05110, 0.05650, 0.05960,
       0.06190, 0.06420, 0.06950, 0.07720, 0.08960, 0.11000, 0.13510, 0.16720,
       0.22240, 0.25770, 0.26440, 0.26780, 0.27550, 0.28340, 0.29160, 0.30120,
       0.31080, 0.32500, 0.34000, 0.37100, 0.41000, 0.42900, 0.43900, 0.44800,
       0.46500, 0.48600, 0.51600, 0.55900, 0.62400, 0.70400, 0.82700, 1.00700,
       1.23100, 1.48900, 1.79900, 2.09000, 2.38000, 2.43000, 2.47000});
  return curve;
}

const LookupCurve &pure_water_backscatter() {
  // Half the pure-seawater scattering coefficient, b_w = 0.00288 (lambda /
  // 500)^-4.32.
  static const LookupCurve curve = [] {
    auto wl = grid(400, 750, 1);
    std::vector<double> v;
    v.reserve(wl.size());
    for (double l : wl)
      v.push_back(0.5 * 0.00288 * std::pow(l / 500.0, -4.32));
    return LookupCurve("b_bw", std::move(wl), std::move(v));
  }();
  return curve;
}

std::vector<LookupCurve> builtin_bottom_curves() {
  const auto wl = grid(400, 750, 10);
  return {
      LookupCurve("sand", wl,
                  {0.62, 0.65, 0.68, 0.71, 0.74, 0.77, 0.80, 0.83, 0.86,
                   0.89, 0.91, 0.93, 0.95, 0.97, 0.985, 1.0, 1.015, 1.03,
                   1.045, 1.06, 1.075, 1.09, 1.10, 1.11, 1.12, 1.13, 1.14,
                   1.15, 1.16, 1.17, 1.18, 1.19, 1.20, 1.21, 1.22, 1.23}),
      LookupCurve("seagrass", wl,
                  {0.45, 0.45, 0.46, 0.47, 0.48, 0.50, 0.52, 0.55, 0.58,
                   0.62, 0.68, 0.76, 0.84, 0.91, 0.97, 1.0,  1.0,  0.97,
                   0.92, 0.86, 0.80, 0.76, 0.73, 0.70, 0.66, 0.62, 0.57,
                   0.52, 0.54, 0.70, 1.05, 1.50, 1.95, 2.30, 2.50, 2.60}),
      LookupCurve("coral", wl,
                  {0.55, 0.55, 0.56, 0.57, 0.58, 0.60, 0.62, 0.64, 0.67,
                   0.71, 0.76, 0.81, 0.86, 0.91, 0.96, 1.0,  1.05, 1.12,
                   1.22, 1.30, 1.36, 1.38, 1.37, 1.35, 1.33, 1.30, 1.24,
                   1.15, 1.16, 1.35, 1.75, 2.20, 2.60, 2.90, 3.10, 3.20}),
  };
}

BottomLibrary builtin_bottom_library() {
  return load_bottom_spectra(builtin_bottom_curves());
}

} // namespace tables

const OpticalTables &OpticalTables::builtin() {
  static const OpticalTables t{};
  return t;
}

} // namespace sdb
