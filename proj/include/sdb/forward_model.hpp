#pragma once

#include "sdb/spectral.hpp"

#include <span>
#include <vector>

namespace sdb {

/// Water-column state for one scene. P, G, X are the phytoplankton
/// absorption, gelbstoff/detritus absorption and particle backscatter at
/// 440 nm (m^-1); delta is the spectrally flat surface offset (sr^-1).
struct WaterColumn {
  double P = 0.05;
  double G = 0.05;
  double X = 0.01;
  double delta = 0.0;
  double S = 0.015; ///< gelbstoff slope, nm^-1
  double Y = 1.0;   ///< particle backscatter exponent
};

/// Per-type albedo magnitudes at 550 nm and mixing weights.
struct BottomState {
  std::vector<double> B;
  std::vector<double> q;
};

/// Subsurface solar zenith and view angles, radians.
struct Geometry {
  double sun_zenith = 0.0;
  double view_zenith = 0.0;

  /// Refracts above-surface angles into the water (Snell, n = 1.34).
  static Geometry from_above_surface(double sun_elevation_deg,
                                     double view_zenith_deg = 0.0,
                                     double refractive_index = 1.34);
};

struct Iops {
  double a = 0;  ///< total absorption, m^-1
  double bb = 0; ///< total backscatter, m^-1
  double k = 0;  ///< attenuation a + bb, m^-1
  double u = 0;  ///< bb / (a + bb)
};

struct PathElongation {
  double water_column = 0; ///< D_C
  double bottom = 0;       ///< D_B
};

namespace forward {

inline constexpr double kDefaultGelbstoffSlope = 0.015;
inline constexpr double kMinGelbstoffSlope = 0.011;
inline constexpr double kMaxGelbstoffSlope = 0.021;

double absorption_phi(double P, double lambda,
                      const OpticalTables &t = OpticalTables::builtin());
double absorption_gelbstoff(double G, double lambda, double S);
double backscatter_particles(double X, double lambda, double Y);

/// Particle backscatter exponent from a surface reflectance spectrum, using
/// the bands that stand in for 440, 490 and 750 nm. Throws DegenerateError
/// when the 490/750 difference vanishes.
double estimate_Y(const Spectrum &R, const BandSet &bands);
double estimate_Y_from_ratio(double chi);

Iops total_iops(const WaterColumn &w, double lambda,
                const OpticalTables &t = OpticalTables::builtin());
double deep_water_rrs(double u);
PathElongation path_elongation(double u);

double bottom_albedo_mix(const BottomState &b, const BottomLibrary &library,
                         double lambda);

/// Subsurface reflectance over a bottom at depth H (m).
double subsurface_rrs(const WaterColumn &w, const BottomState &b, double H,
                      const Geometry &g, const BottomLibrary &library,
                      double lambda,
                      const OpticalTables &t = OpticalTables::builtin());

double subsurface_to_surface(double r, double delta);
double surface_to_subsurface(double R, double delta);

/// Bottom albedo implied by a surface reflectance R at lambda, given the
/// water column and depth.
double rho_modelled(const WaterColumn &w, double H, const Geometry &g,
                    double R, double lambda,
                    const OpticalTables &t = OpticalTables::builtin());

} // namespace forward

/// Optical constants of one scene's band set, sampled once so the inversion
/// inner loop evaluates only closed forms.
class BandOptics {
public:
  BandOptics(const BandSet &bands, const BottomLibrary &library,
             const OpticalTables &tables = OpticalTables::builtin());

  std::size_t band_count() const { return lambda_.size(); }
  std::size_t bottom_count() const { return n_bottom_; }
  double lambda(std::size_t band) const { return lambda_[band]; }
  /// Library albedo of `type` at `band`.
  double bottom(std::size_t type, std::size_t band) const {
    return bottom_[type * lambda_.size() + band];
  }

  /// Per-band attenuation quantities for a water column.
  struct ColumnTerms {
    std::vector<double> k, r_inf, dc, db;
  };
  void column_terms(const WaterColumn &w, ColumnTerms &out) const;

  /// Surface reflectance at every band for one pixel. `albedo` holds the
  /// mixed bottom albedo per band.
  void surface_rrs(const WaterColumn &w, const ColumnTerms &terms,
                   std::span<const double> albedo, double H,
                   const Geometry &g, std::span<double> out) const;

  /// Mixed albedo per band.
  void mix(std::span<const double> B, std::span<const double> q,
           std::span<double> out) const;

private:
  std::vector<double> lambda_, aw_, bbw_, a0_, a1_;
  std::vector<double> bottom_;
  std::size_t n_bottom_ = 0;
};

} // namespace sdb
