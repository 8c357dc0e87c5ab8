#include "sdb/error.hpp"
#include "sdb/forward_model.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace sdb;
using doctest::Approx;

TEST_CASE("phytoplankton absorption") {
  for (double P : {0.01, 0.1, 1.0, 0.05})
    CHECK(forward::absorption_phi(P, 440.0) == P);
  CHECK(forward::absorption_phi(1.0, 550.0) == 0.19724);
  const double P = 0.05226967;
  CHECK(forward::absorption_phi(P, 655.0) ==
        Approx((0.27135 + 0.02374 * std::log(P)) * P).epsilon(1e-12));
  CHECK(forward::absorption_phi(P, 655.0) == Approx(0.010520).epsilon(1e-4));
  CHECK_THROWS_AS(forward::absorption_phi(0.0, 440.0), DomainError);
  CHECK_THROWS_AS(forward::absorption_phi(0.1, 390.0), RangeError);
}

TEST_CASE("gelbstoff absorption and particle backscatter") {
  CHECK(forward::absorption_gelbstoff(0.07, 440.0, 0.013) == 0.07);
  CHECK(forward::absorption_gelbstoff(0.06, 540.0, 0.015) ==
        Approx(0.06 * std::exp(-1.5)).epsilon(1e-14));
  CHECK(forward::absorption_gelbstoff(0.06, 540.0, 0.015) == Approx(0.013388).epsilon(1e-4));
  CHECK(forward::absorption_gelbstoff(0.06, 340.0, 0.015) == Approx(0.26890).epsilon(1e-4));
  CHECK(forward::backscatter_particles(0.02, 440.0, 1.7) == 0.02);
  CHECK(forward::backscatter_particles(0.01, 880.0, 1.0) == Approx(0.005).epsilon(1e-14));
  CHECK(forward::backscatter_particles(0.01, 220.0, 2.0) == Approx(0.04).epsilon(1e-14));
}

TEST_CASE("particle exponent from the band ratio") {
  CHECK(forward::estimate_Y_from_ratio(0.0) == Approx(-7.4648).epsilon(1e-12));
  CHECK(forward::estimate_Y_from_ratio(1e3) == Approx(3.44).epsilon(1e-12));
  CHECK(std::abs(forward::estimate_Y_from_ratio(std::log(3.17) / 2.01)) < 1e-12);
  const BandSet bands({443, 483, 561, 655});
  // 750 maps to the longest band (655) on this set.
  const Spectrum R({0.012, 0.010, 0.006, 0.002});
  const double chi = (0.012 - 0.002) / (0.010 - 0.002);
  CHECK(forward::estimate_Y(R, bands) ==
        Approx(3.44 * (1 - 3.17 * std::exp(-2.01 * chi))).epsilon(1e-12));
  CHECK_THROWS_AS(forward::estimate_Y(Spectrum({0.01, 0.002, 0.003, 0.002}), bands),
                  DegenerateError);
}

TEST_CASE("total IOPs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.001, 0.3);
  for (int i = 0; i < 200; ++i) {
    WaterColumn w{U(rng), U(rng), U(rng), 0.0, 0.015, 1.3};
    const double lambda = 400.0 + 350.0 * U(rng) / 0.3;
    const Iops io = forward::total_iops(w, lambda);
    CHECK(io.k == io.a + io.bb);
    CHECK(std::abs(io.u * (io.a + io.bb) - io.bb) < 1e-14);
    CHECK(io.u > 0.0);
    CHECK(io.u < 1.0);
  }
  const auto &t = OpticalTables::builtin();
  WaterColumn clear{1e-12, 1e-12, 1e-12, 0.0, 0.015, 1.0};
  const Iops io = forward::total_iops(clear, 550.0);
  CHECK(io.a == Approx(t.water_absorption.value_at(550.0)).epsilon(1e-9));
  CHECK(io.bb == Approx(t.water_backscatter.value_at(550.0)).epsilon(1e-9));
}

TEST_CASE("deep water reflectance and path elongation") {
  CHECK(forward::deep_water_rrs(0.0) == 0.0);
  CHECK(forward::deep_water_rrs(0.1) == Approx(0.0101).epsilon(1e-12));
  CHECK(forward::deep_water_rrs(0.5) == Approx(0.0845).epsilon(1e-12));
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = forward::deep_water_rrs(i / 1000.0);
    CHECK(r >= 0.0);
    CHECK(r > prev);
    prev = r;
  }
  auto d0 = forward::path_elongation(0.0);
  CHECK(d0.water_column == 1.03);
  CHECK(d0.bottom == 1.04);
  auto d1 = forward::path_elongation(1.0);
  CHECK(d1.water_column == Approx(1.03 * std::sqrt(3.4)).epsilon(1e-14));
  CHECK(d1.bottom == Approx(1.04 * std::sqrt(6.4)).epsilon(1e-14));
  PathElongation last = d0;
  for (int i = 1; i <= 2000; ++i) {
    const double u = i / 2000.0;
    const auto d = forward::path_elongation(u);
    CHECK(d.water_column > last.water_column);
    CHECK(d.bottom > last.bottom);
    if (u >= 0.0086)
      CHECK(d.bottom >= d.water_column);
    last = d;
  }
}

TEST_CASE("bottom albedo mixing") {
  const auto lib = tables::builtin_bottom_library();
  BottomState one{{0.3}, {1.0}};
  const auto sand = lib.select(std::vector<std::string>{"sand"});
  CHECK(forward::bottom_albedo_mix(one, sand, 480.0) ==
        Approx(0.3 * sand[0].value_at(480.0)).epsilon(1e-14));
  const auto two = lib.select(std::vector<std::string>{"sand", "seagrass"});
  BottomState mix{{0.1, 0.3}, {1.0, 3.0}};
  CHECK(forward::bottom_albedo_mix(mix, two, 550.0) == Approx(0.25).epsilon(1e-14));
  BottomState none{{0.1, 0.3}, {0.0, 0.0}};
  CHECK_THROWS_AS(forward::bottom_albedo_mix(none, two, 550.0), DegenerateError);
}

namespace {

double oracle_rrs(const WaterColumn &w, double rho, double H, const Geometry &g,
                  double lambda) {
  const auto &t = OpticalTables::builtin();
  const double aphi =
      (t.a0.value_at(lambda) + t.a1.value_at(lambda) * std::log(w.P)) * w.P;
  const double a = t.water_absorption.value_at(lambda) + aphi +
                   w.G * std::exp(-w.S * (lambda - 440.0));
  const double bb = t.water_backscatter.value_at(lambda) +
                    w.X * std::pow(440.0 / lambda, w.Y);
  const double k = a + bb, u = bb / k;
  const double rinf = 0.084 * u + 0.170 * u * u;
  const double dc = 1.03 * std::sqrt(1 + 2.4 * u), db = 1.04 * std::sqrt(1 + 5.4 * u);
  const double cs = std::cos(g.sun_zenith), cv = std::cos(g.view_zenith);
  return rinf * (1 - std::exp(-(1 / cs + dc / cv) * k * H)) +
         rho / M_PI * std::exp(-(1 / cs + db / cv) * k * H);
}

} // namespace

TEST_CASE("subsurface reflectance") {
  const auto lib = tables::builtin_bottom_library().select(
      std::vector<std::string>{"sand", "seagrass"});
  WaterColumn w{0.05226967, 0.06326824, 0.01420787, 0.00079306, 0.015, 1.2};
  BottomState b{{0.2, 0.1}, {1.0, 2.0}};
  const Geometry g = Geometry::from_above_surface(55.22);
  for (double lambda : {443.0, 483.0, 561.0, 655.0}) {
    const double rho = forward::bottom_albedo_mix(b, lib, lambda);
    CHECK(forward::subsurface_rrs(w, b, 0.0, g, lib, lambda) ==
          Approx(rho / M_PI).epsilon(1e-15));
    for (double H : {0.5, 3.0, 16.47, 30.0})
      CHECK(forward::subsurface_rrs(w, b, H, g, lib, lambda) ==
            Approx(oracle_rrs(w, rho, H, g, lambda)).epsilon(1e-12));
    const double rinf = forward::deep_water_rrs(forward::total_iops(w, lambda).u);
    CHECK(std::abs(forward::subsurface_rrs(w, b, 1e4, g, lib, lambda) - rinf) < 1e-12);
  }
}

TEST_CASE("subsurface reflectance is monotone in depth") {
  const auto lib = tables::builtin_bottom_library();
  WaterColumn w{0.03, 0.02, 0.008, 0.0, 0.015, 1.0};
  const Geometry g = Geometry::from_above_surface(50.0);
  for (double B : {0.02, 0.5}) {
    BottomState b{{B, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    for (double lambda : {450.0, 560.0, 650.0}) {
      const double rho = forward::bottom_albedo_mix(b, lib, lambda);
      const double rinf = forward::deep_water_rrs(forward::total_iops(w, lambda).u);
      for (double H = 0.1; H < 30.0; H += 0.5) {
        const double d = forward::subsurface_rrs(w, b, H + 1e-3, g, lib, lambda) -
                         forward::subsurface_rrs(w, b, H, g, lib, lambda);
        if (rho / M_PI > rinf)
          CHECK(d < 0.0);
        else
          CHECK(d > 0.0);
      }
    }
  }
}

TEST_CASE("surface and subsurface conversion") {
  CHECK(forward::subsurface_to_surface(0.0, 0.002) == 0.002);
  CHECK(forward::subsurface_to_surface(0.01, 0.0) == Approx(0.005 / 0.985).epsilon(1e-14));
  CHECK(forward::subsurface_to_surface(0.01, 0.0) == Approx(0.0050761).epsilon(1e-5));
  CHECK(forward::surface_to_subsurface(0.003, 0.003) == 0.0);
  CHECK(forward::surface_to_subsurface(0.0050761, 0.0) == Approx(0.01).epsilon(1e-5));
  for (double r = 0.0; r <= 0.2; r += 0.001)
    for (double d : {-0.003, 0.0, 0.004}) {
      CHECK(std::abs(forward::surface_to_subsurface(forward::subsurface_to_surface(r, d), d) - r) < 1e-12);
      CHECK(std::abs(forward::subsurface_to_surface(forward::surface_to_subsurface(r, d), d) - r) < 1e-12);
    }
  CHECK_THROWS_AS(forward::subsurface_to_surface(1.0 / 1.5, 0.0), DomainError);
  CHECK_THROWS_AS(forward::surface_to_subsurface(-1.0 / 3.0, 0.0), DomainError);
}

TEST_CASE("bottom albedo inversion") {
  const auto lib = tables::builtin_bottom_library();
  const Geometry g = Geometry::from_above_surface(48.0);
  WaterColumn w{0.04, 0.03, 0.01, 0.0012, 0.014, 1.4};
  CHECK(forward::rho_modelled(w, 0.0, g, forward::subsurface_to_surface(0.02, w.delta), 500.0) ==
        Approx(M_PI * 0.02).epsilon(1e-12));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    BottomState b{{0.6 * U(rng), 0.6 * U(rng), 0.6 * U(rng)},
                  {0.01 + U(rng), 0.01 + U(rng), 0.01 + U(rng)}};
    const double H = 30.0 * U(rng);
    const double lambda = 420.0 + 250.0 * U(rng);
    const double rho = forward::bottom_albedo_mix(b, lib, lambda);
    if (rho < 1e-3)
      continue;
    const double R = forward::subsurface_to_surface(
        forward::subsurface_rrs(w, b, H, g, lib, lambda), w.delta);
    // Recovering rho multiplies rounding errors by exp(k H).
    CHECK(forward::rho_modelled(w, H, g, R, lambda) ==
          Approx(rho).epsilon(H < 10.0 ? 1e-8 : 1e-5));
  }
}

TEST_CASE("refraction into the water") {
  const Geometry g = Geometry::from_above_surface(90.0);
  CHECK(g.sun_zenith == 0.0);
  const Geometry h = Geometry::from_above_surface(30.0, 10.0);
  CHECK(std::sin(h.sun_zenith) * 1.34 == Approx(std::sin(M_PI / 3)).epsilon(1e-12));
  CHECK(std::sin(h.view_zenith) * 1.34 == Approx(std::sin(M_PI / 18)).epsilon(1e-12));
}
