#include "sdb/forward_model.hpp"

#include "sdb/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sdb {

Geometry Geometry::from_above_surface(double sun_elevation_deg,
                                      double view_zenith_deg,
                                      double refractive_index) {
  if (!(sun_elevation_deg > 0.0 && sun_elevation_deg <= 90.0))
    throw DomainError("sun elevation must be in (0, 90] degrees, got " +
                      std::to_string(sun_elevation_deg));
  if (!(view_zenith_deg >= 0.0 && view_zenith_deg < 90.0))
    throw DomainError("view zenith must be in [0, 90) degrees");
  constexpr double deg = std::numbers::pi / 180.0;
  const double sun_air = (90.0 - sun_elevation_deg) * deg;
  const double view_air = view_zenith_deg * deg;
  return {std::asin(std::sin(sun_air) / refractive_index),
          std::asin(std::sin(view_air) / refractive_index)};
}

namespace forward {

double absorption_phi(double P, double lambda, const OpticalTables &t) {
  if (!(P > 0.0))
    throw DomainError("phytoplankton absorption P must be positive, got " +
                      std::to_string(P));
  return (t.a0.value_at(lambda) + t.a1.value_at(lambda) * std::log(P)) * P;
}

double absorption_gelbstoff(double G, double lambda, double S) {
  return G * std::exp(-S * (lambda - 440.0));
}

double backscatter_particles(double X, double lambda, double Y) {
  if (!(lambda > 0.0))
    throw DomainError("wavelength must be positive");
  return X * std::pow(440.0 / lambda, Y);
}

double estimate_Y_from_ratio(double chi) {
  return 3.44 * (1.0 - 3.17 * std::exp(-2.01 * chi));
}

double estimate_Y(const Spectrum &R, const BandSet &bands) {
  if (R.size() != bands.size())
    throw UsageError("spectrum and band set sizes differ");
  const double r440 = R[bands.nearest(440.0)];
  const double r490 = R[bands.nearest(490.0)];
  const double r750 = R[bands.nearest(750.0)];
  const double denom = r490 - r750;
  if (std::abs(denom) < 1e-12)
    throw DegenerateError("cannot estimate Y: R(490) - R(750) vanishes");
  return estimate_Y_from_ratio((r440 - r750) / denom);
}

Iops total_iops(const WaterColumn &w, double lambda, const OpticalTables &t) {
  Iops out;
  out.a = t.water_absorption.value_at(lambda) + absorption_phi(w.P, lambda, t) +
          absorption_gelbstoff(w.G, lambda, w.S);
  out.bb = t.water_backscatter.value_at(lambda) +
           backscatter_particles(w.X, lambda, w.Y);
  out.k = out.a + out.bb;
  out.u = out.bb / out.k;
  return out;
}

double deep_water_rrs(double u) { return 0.084 * u + 0.170 * u * u; }

PathElongation path_elongation(double u) {
  return {1.03 * std::sqrt(1.0 + 2.4 * u), 1.04 * std::sqrt(1.0 + 5.4 * u)};
}

double bottom_albedo_mix(const BottomState &b, const BottomLibrary &library,
                         double lambda) {
  if (b.B.size() != library.size() || b.q.size() != library.size())
    throw UsageError("bottom state has " + std::to_string(b.B.size()) +
                     " types but the library has " +
                     std::to_string(library.size()));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < library.size(); ++i) {
    num += b.B[i] * b.q[i] * library[i].value_at(lambda);
    den += b.q[i];
  }
  if (!(den > 0.0))
    throw DegenerateError("bottom mixing weights sum to zero");
  return num / den;
}

namespace {

struct Attenuation {
  double column; ///< (1/cos sun + D_C/cos view) k
  double bottom; ///< (1/cos sun + D_B/cos view) k
  double r_inf;
};

Attenuation attenuation(const WaterColumn &w, const Geometry &g,
                        double lambda, const OpticalTables &t) {
  const Iops iop = total_iops(w, lambda, t);
  const PathElongation d = path_elongation(iop.u);
  const double inv_sun = 1.0 / std::cos(g.sun_zenith);
  const double cos_view = std::cos(g.view_zenith);
  return {(inv_sun + d.water_column / cos_view) * iop.k,
          (inv_sun + d.bottom / cos_view) * iop.k, deep_water_rrs(iop.u)};
}

} // namespace

double subsurface_rrs(const WaterColumn &w, const BottomState &b, double H,
                      const Geometry &g, const BottomLibrary &library,
                      double lambda, const OpticalTables &t) {
  if (!(H >= 0.0))
    throw DomainError("depth must be nonnegative");
  const Attenuation att = attenuation(w, g, lambda, t);
  const double rho = bottom_albedo_mix(b, library, lambda);
  return att.r_inf * (1.0 - std::exp(-att.column * H)) +
         rho / std::numbers::pi * std::exp(-att.bottom * H);
}

double subsurface_to_surface(double r, double delta) {
  const double den = 1.0 - 1.5 * r;
  if (den == 0.0)
    throw DomainError("subsurface reflectance 2/3 is singular");
  return 0.5 * r / den + delta;
}

double surface_to_subsurface(double R, double delta) {
  const double x = R - delta;
  const double den = 1.0 + 3.0 * x;
  if (den == 0.0)
    throw DomainError("surface reflectance offset of -1/3 is singular");
  return 2.0 * x / den;
}

double rho_modelled(const WaterColumn &w, double H, const Geometry &g,
                    double R, double lambda, const OpticalTables &t) {
  const Attenuation att = attenuation(w, g, lambda, t);
  const double r = surface_to_subsurface(R, w.delta);
  return std::numbers::pi * std::exp(att.bottom * H) *
         (r - att.r_inf * (1.0 - std::exp(-att.column * H)));
}

} // namespace forward

BandOptics::BandOptics(const BandSet &bands, const BottomLibrary &library,
                       const OpticalTables &tables)
    : n_bottom_(library.size()) {
  for (double l : bands.centers()) {
    lambda_.push_back(l);
    aw_.push_back(tables.water_absorption.value_at(l));
    bbw_.push_back(tables.water_backscatter.value_at(l));
    a0_.push_back(tables.a0.value_at(l));
    a1_.push_back(tables.a1.value_at(l));
  }
  bottom_.reserve(n_bottom_ * lambda_.size());
  for (std::size_t i = 0; i < n_bottom_; ++i)
    for (double l : lambda_)
      bottom_.push_back(library[i].value_at(l));
}

void BandOptics::column_terms(const WaterColumn &w, ColumnTerms &out) const {
  const std::size_t n = lambda_.size();
  out.k.resize(n);
  out.r_inf.resize(n);
  out.dc.resize(n);
  out.db.resize(n);
  const double logP = std::log(w.P);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda_[i];
    const double a = aw_[i] + (a0_[i] + a1_[i] * logP) * w.P +
                     w.G * std::exp(-w.S * (l - 440.0));
    const double bb = bbw_[i] + w.X * std::pow(440.0 / l, w.Y);
    const double k = a + bb;
    const double u = bb / k;
    out.k[i] = k;
    out.r_inf[i] = forward::deep_water_rrs(u);
    const PathElongation d = forward::path_elongation(u);
    out.dc[i] = d.water_column;
    out.db[i] = d.bottom;
  }
}

void BandOptics::surface_rrs(const WaterColumn &w, const ColumnTerms &terms,
                             std::span<const double> albedo, double H,
                             const Geometry &g, std::span<double> out) const {
  const double inv_sun = 1.0 / std::cos(g.sun_zenith);
  const double inv_view = 1.0 / std::cos(g.view_zenith);
  for (std::size_t i = 0; i < lambda_.size(); ++i) {
    const double kh = terms.k[i] * H;
    const double r =
        terms.r_inf[i] *
            (1.0 - std::exp(-(inv_sun + terms.dc[i] * inv_view) * kh)) +
        albedo[i] * std::numbers::inv_pi *
            std::exp(-(inv_sun + terms.db[i] * inv_view) * kh);
    out[i] = 0.5 * r / (1.0 - 1.5 * r) + w.delta;
  }
}

void BandOptics::mix(std::span<const double> B, std::span<const double> q,
                     std::span<double> out) const {
  const std::size_t n = lambda_.size();
  double qsum = 0.0;
  for (std::size_t t = 0; t < n_bottom_; ++t)
    qsum += q[t];
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < n_bottom_; ++t)
      s += B[t] * q[t] * bottom_[t * n + i];
    out[i] = s / qsum;
  }
}

} // namespace sdb
