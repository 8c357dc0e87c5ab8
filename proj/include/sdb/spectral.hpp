#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sdb {

/// Tabulated curve over wavelength (nm), evaluated by piecewise-linear
/// interpolation. Knots must be strictly increasing and values finite.
class LookupCurve {
public:
  LookupCurve() = default;
  LookupCurve(std::string name, std::vector<double> wavelengths,
              std::vector<double> values);

  const std::string &name() const { return name_; }
  std::span<const double> wavelengths() const { return wavelengths_; }
  std::span<const double> values() const { return values_; }
  double min_wavelength() const { return wavelengths_.front(); }
  double max_wavelength() const { return wavelengths_.back(); }
  bool covers(double lambda) const {
    return lambda >= min_wavelength() && lambda <= max_wavelength();
  }

  /// Throws RangeError (naming the curve) outside [min, max].
  double value_at(double lambda) const;

  LookupCurve scaled(double factor) const;

private:
  std::string name_;
  std::vector<double> wavelengths_;
  std::vector<double> values_;
};

/// Band centres of a multispectral sensor, strictly increasing.
class BandSet {
public:
  BandSet() = default;
  explicit BandSet(std::vector<double> centers,
                   std::vector<std::string> names = {});

  std::size_t size() const { return centers_.size(); }
  double center(std::size_t i) const { return centers_[i]; }
  std::span<const double> centers() const { return centers_; }
  const std::vector<std::string> &names() const { return names_; }

  /// Index of the band used to stand in for a formula wavelength: the
  /// nearest centre within `max_distance` nm, otherwise the longest band.
  std::size_t nearest(double lambda, double max_distance = 60.0) const;

  bool operator==(const BandSet &other) const {
    return centers_ == other.centers_;
  }

private:
  std::vector<double> centers_;
  std::vector<std::string> names_;
};

/// One value per band.
struct Spectrum {
  std::vector<double> values;

  Spectrum() = default;
  explicit Spectrum(std::vector<double> v) : values(std::move(v)) {}
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double &operator[](std::size_t i) { return values[i]; }
};

double value_at(const LookupCurve &curve, double lambda);

/// Samples `curve` at every band centre (delta-function band response).
Spectrum resample_curve(const LookupCurve &curve, const BandSet &bands);

/// Named end-member albedo spectra, each normalised to 1 at 550 nm.
class BottomLibrary {
public:
  BottomLibrary() = default;
  explicit BottomLibrary(std::vector<LookupCurve> normalized)
      : spectra_(std::move(normalized)) {}

  std::size_t size() const { return spectra_.size(); }
  const LookupCurve &operator[](std::size_t i) const { return spectra_[i]; }
  std::vector<std::string> names() const;
  /// Library restricted to the listed members, in that order.
  BottomLibrary subset(std::span<const std::size_t> members) const;
  /// Members looked up by name; throws UsageError for unknown names.
  BottomLibrary select(std::span<const std::string> names) const;

private:
  std::vector<LookupCurve> spectra_;
};

/// Divides every curve by its value at 550 nm. Throws DomainError when that
/// value is not strictly positive and RangeError when 550 nm is not covered.
BottomLibrary load_bottom_spectra(std::vector<LookupCurve> curves);

/// Two-column ASCII `wavelength value` with `#` comments.
LookupCurve read_curve_file(const std::filesystem::path &path);
void write_curve_file(const std::filesystem::path &path,
                      const LookupCurve &curve, const std::string &comment);

/// Every regular file in `dir` is a curve named after its stem.
BottomLibrary read_bottom_library(const std::filesystem::path &dir);

namespace tables {

/// Phytoplankton absorption shape coefficients, 400-750 nm at 5 nm,
/// normalised to 440 nm.
const LookupCurve &a0();
const LookupCurve &a1();
/// Pure-water absorption (m^-1), Pope & Fry with Smith & Baker beyond 725 nm.
const LookupCurve &pure_water_absorption();
/// Pure-seawater backscatter (m^-1), Morel, 1 nm over 400-750 nm.
const LookupCurve &pure_water_backscatter();

/// Built-in representative albedo shapes: sand, seagrass, coral.
std::vector<LookupCurve> builtin_bottom_curves();
BottomLibrary builtin_bottom_library();

} // namespace tables

/// The optical tables used by the forward model. Defaults to the built-ins.
struct OpticalTables {
  LookupCurve a0 = tables::a0();
  LookupCurve a1 = tables::a1();
  LookupCurve water_absorption = tables::pure_water_absorption();
  LookupCurve water_backscatter = tables::pure_water_backscatter();

  static const OpticalTables &builtin();
};

} // namespace sdb
